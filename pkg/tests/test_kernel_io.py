import os

import numpy as np
import pytest

from ugwb.kernel_io import KERNEL_FORMAT_VERSION, KERNEL_MAGIC, read_kernel, write_kernel
from ugwb.operator_core import GridSpec, KernelProjection


@pytest.fixture
def sample():
    grid = GridSpec(dim=2, half_width=3.0, points_per_axis=8)
    rng = np.random.default_rng(42)
    a = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    return KernelProjection(kernel=0.5 * (a + a.conj().T), grid=grid)


def test_round_trip(tmp_path, sample):
    path = tmp_path / "k.ugwk"
    nbytes = write_kernel(sample, path)
    assert nbytes == os.path.getsize(path)

    back = read_kernel(path)
    assert np.array_equal(back.kernel, sample.kernel)  # bit-exact
    assert back.grid.dim == sample.grid.dim
    assert back.grid.half_width == sample.grid.half_width
    assert back.grid.points_per_axis == sample.grid.points_per_axis
    assert back.decay is None
    assert back.hermiticity_defect == 0.0


def test_no_temp_files_left(tmp_path, sample):
    write_kernel(sample, tmp_path / "k.ugwk")
    assert sorted(f.name for f in tmp_path.iterdir()) == ["k.ugwk"]


def test_overwrite_is_atomic(tmp_path, sample):
    path = tmp_path / "k.ugwk"
    write_kernel(sample, path)
    first = path.read_bytes()
    write_kernel(sample, path)
    assert path.read_bytes() == first
    assert sorted(f.name for f in tmp_path.iterdir()) == ["k.ugwk"]


def test_bad_magic(tmp_path, sample):
    path = tmp_path / "k.ugwk"
    write_kernel(sample, path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError, match="magic"):
        read_kernel(path)


def test_bad_version(tmp_path, sample):
    path = tmp_path / "k.ugwk"
    write_kernel(sample, path)
    raw = bytearray(path.read_bytes())
    raw[4] = KERNEL_FORMAT_VERSION + 9  # little-endian low byte
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError, match="version"):
        read_kernel(path)


def test_truncated_header(tmp_path):
    path = tmp_path / "k.ugwk"
    path.write_bytes(KERNEL_MAGIC + b"\x01")
    with pytest.raises(ValueError, match="truncated"):
        read_kernel(path)


def test_truncated_body(tmp_path, sample):
    path = tmp_path / "k.ugwk"
    write_kernel(sample, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-16])
    with pytest.raises(ValueError, match="short"):
        read_kernel(path)


def test_trailing_garbage(tmp_path, sample):
    path = tmp_path / "k.ugwk"
    write_kernel(sample, path)
    with open(path, "ab") as fh:
        fh.write(b"\x00" * 8)
    with pytest.raises(ValueError, match="trailing"):
        read_kernel(path)


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        read_kernel(tmp_path / "absent.ugwk")
