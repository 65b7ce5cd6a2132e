"""Density diagnostics tying radii statistics to the trace per unit volume.

A projection with uniformly separated concentration radii and bounded
multiplicities must have vanishing trace per unit volume; these helpers
measure both sides of that implication on finite data and report whether
the observed numbers are consistent with it.
"""

import math
from collections import namedtuple

import numpy as np

from .errors import BoxExceedsGrid, TooFewRadii

__all__ = [
    "trace_per_unit_volume",
    "radius_gap_stats",
    "Prop24Verdict",
    "prop24_diagnostic",
]


def trace_per_unit_volume(p, box_halves):
    """Diagonal mass per volume over a nest of centered boxes.

    For each half-width L, value(L) = sum over grid points inside
    [-L, L]^dim of K[i][i] weight, divided by (2L)^dim. Boxes must be
    increasing and fit inside the kernel's grid.
    """
    box_halves = [float(x) for x in box_halves]
    if any(b <= a for a, b in zip(box_halves, box_halves[1:])):
        raise ValueError(f"box half-widths must increase, got {box_halves}")
    grid = p.grid
    diag = np.real(np.diag(p.kernel))
    coords = np.max(np.abs(grid.points()), axis=1)
    out = []
    for half in box_halves:
        if half <= 0:
            raise ValueError(f"box half-width must be positive, got {half}")
        if half > grid.half_width + 1e-12:
            raise BoxExceedsGrid(f"box half-width {half} exceeds grid half-width {grid.half_width}")
        inside = coords <= half
        total = float(diag[inside].sum() * grid.weight)
        out.append((half, total / (2.0 * half) ** grid.dim))
    return out


def radius_gap_stats(radii):
    """Consecutive gaps of a sorted radius list and their index trend.

    Returns (min_gap, gaps, trend) where trend is the slope of log gap
    against log index; ~0 for arithmetic radii, approximately -1/2 when the
    radii grow like sqrt(k). Needs at least three radii.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 3:
        raise TooFewRadii(f"need at least 3 radii, got {radii.size}")
    if np.any(np.diff(radii) < 0):
        raise ValueError("radii must be sorted increasing")
    gaps = np.diff(radii)
    positive = gaps > 0
    if positive.sum() >= 2:
        idx = np.arange(1, len(gaps) + 1, dtype=float)
        slope, _ = np.polyfit(np.log(idx[positive]), np.log(gaps[positive]), 1)
        trend = float(slope)
    else:
        trend = 0.0
    return float(gaps.min()), gaps, trend


Prop24Verdict = namedtuple(
    "Prop24Verdict",
    ["m_star", "min_gap", "min_gap_resolved", "limit", "limit_positive", "verdict"],
)


def prop24_diagnostic(u, tpuv_sequence):
    """Consistency check between basis structure and trace density.

    Separated radii (min gap resolvable above the grid spacing) with bounded
    multiplicities force the trace per unit volume to vanish; a positive
    extrapolated limit together with both structure conditions is therefore
    INCONSISTENT and indicates a defect upstream. The limit is the intercept
    of a value = a + c/L fit over the three largest boxes.
    """
    if len(tpuv_sequence) < 3:
        raise ValueError(f"need at least 3 boxes to extrapolate, got {len(tpuv_sequence)}")
    tail = sorted(tpuv_sequence)[-3:]
    ls = np.array([t[0] for t in tail])
    vals = np.array([t[1] for t in tail])
    coeffs = np.polyfit(1.0 / ls, vals, 1)
    limit = float(coeffs[1])
    limit_positive = limit > 0 and limit > 0.5 * float(vals[-1])

    m_star = max((lv.multiplicity for lv in u.levels), default=0)
    radii = np.sort(u.radii()) if u.levels else np.array([])
    min_gap = float(np.diff(radii).min()) if radii.size >= 2 else math.inf
    min_gap_resolved = min_gap > u.grid.spacing

    inconsistent = (m_star > 0) and min_gap_resolved and limit_positive
    return Prop24Verdict(
        m_star=m_star,
        min_gap=min_gap,
        min_gap_resolved=min_gap_resolved,
        limit=limit,
        limit_positive=limit_positive,
        verdict="INCONSISTENT" if inconsistent else "CONSISTENT",
    )
