"""Binary kernel files: exact, self-describing storage for grid projections.

Layout is a fixed little-endian header (magic, version, dim, points per
axis, half width, flags) followed by the dense kernel, row-major
complex128. Binary keeps idempotency checks honest; text formats shed
digits. Writes are atomic (temp file + rename in the target directory).
"""

import os
import struct
import tempfile

import numpy as np

from .operator_core import GridSpec, KernelProjection

__all__ = ["KERNEL_MAGIC", "KERNEL_FORMAT_VERSION", "write_kernel", "read_kernel"]

KERNEL_MAGIC = b"UGWK"
KERNEL_FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIIdI")


def write_kernel(p, path):
    """Write a KernelProjection to path atomically. Returns the byte count."""
    header = _HEADER.pack(
        KERNEL_MAGIC,
        KERNEL_FORMAT_VERSION,
        p.grid.dim,
        p.grid.points_per_axis,
        p.grid.half_width,
        0,
    )
    body = np.ascontiguousarray(p.kernel, dtype="<c16").tobytes()
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".ugwk.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(body)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return len(header) + len(body)


def read_kernel(path):
    """Read a kernel file back into a KernelProjection (decay metadata unset)."""
    with open(os.fspath(path), "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, dim, points, half_width, _flags = _HEADER.unpack(head)
        if magic != KERNEL_MAGIC:
            raise ValueError(f"{path}: not a kernel file (magic {magic!r})")
        if version != KERNEL_FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        grid = GridSpec(dim=dim, half_width=half_width, points_per_axis=points)
        n = grid.total_points
        body = fh.read(16 * n * n)
        if len(body) != 16 * n * n:
            raise ValueError(f"{path}: expected {n}x{n} complex entries, file is short")
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes after kernel body")
    kernel = np.frombuffer(body, dtype="<c16").reshape(n, n).copy()
    return KernelProjection(kernel=kernel, grid=grid)
