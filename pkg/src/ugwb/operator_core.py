"""Grid-discretized projection kernels and the weighted-operator pipeline.

A projection P with kernel K on a midpoint grid is compressed against a
radial weight f into W_f = P f(X) P, assembled in factored form so the
result is Hermitian positive semidefinite by construction. Eigenvalues of
W_f map to concentration radii, eigenvectors to basis functions whose
localization around the matching sphere is certified by an explicit
Hilbert-Schmidt bound. build_ugwb runs the whole chain.
"""

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    BetaMarginWarning,
    DimensionMismatch,
    OverflowFlagWarning,
    RadiusClampWarning,
)
from .landau import mean_radius_from_lambda, radius_from_lambda
from .special_functions import jbracket

__all__ = [
    "POINT_CAP",
    "GridSpec",
    "LocalizationFunction",
    "exponential_weight",
    "check_localization_function",
    "KernelProjection",
    "assemble_wf",
    "eigendecompose",
    "UgwbLevel",
    "Ugwb",
    "group_degeneracies",
    "localization_integral",
    "hs_bound",
    "build_ugwb",
    "check_ugwb",
    "verify_projection",
    "recommended_half_width",
]

POINT_CAP = 8192  # dense kernels above this point count do not fit the target host


@dataclass
class GridSpec:
    """Uniform midpoint grid on the centered box [-half_width, half_width]^dim."""

    dim: int
    half_width: float
    points_per_axis: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if self.points_per_axis < 2:
            raise ValueError(f"need at least 2 points per axis, got {self.points_per_axis}")
        if self.total_points > POINT_CAP:
            raise ValueError(
                f"{self.points_per_axis}^{self.dim} = {self.total_points} points "
                f"exceeds the cap {POINT_CAP}"
            )

    @property
    def spacing(self):
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def weight(self):
        """Cell volume, the quadrature weight of one midpoint sample."""
        return self.spacing**self.dim

    @property
    def total_points(self):
        return self.points_per_axis**self.dim

    def axis(self):
        h = self.spacing
        return -self.half_width + h * (np.arange(self.points_per_axis) + 0.5)

    @cached_property
    def _points(self):
        ax = self.axis()
        mesh = np.meshgrid(*([ax] * self.dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def points(self):
        """Cell midpoints, shape (total_points, dim), row-major in axis order."""
        return self._points

    @cached_property
    def _radii(self):
        return np.sqrt((self._points**2).sum(axis=1))

    def radii(self):
        return self._radii


@dataclass
class LocalizationFunction:
    """Radial growth weight G(s) >= 1 with near-triangle constant c_g.

    eval maps arrays of nonnegative radii to values; the contract
    G(s + t) <= c_g G(s) G(t) is sampled, not proved, by
    check_localization_function.
    """

    eval: object
    c_g: float = 1.0

    def __call__(self, s):
        return self.eval(s)


def exponential_weight(q):
    """G(s) = exp(q <s>), the standard growth weight; c_g = 1."""
    if q <= 0:
        raise ValueError(f"weight rate must be positive, got {q}")
    return LocalizationFunction(eval=lambda s: np.exp(q * jbracket(s)), c_g=1.0)


def check_localization_function(g, samples=256, s_max=50.0, seed=0):
    """Sampled report on the LocalizationFunction contract.

    Checks G >= 1, monotonicity on sorted samples, and the near-triangle
    inequality G(s+t) <= c_g G(s) G(t) on random pairs. Returns a dict with
    min_value, monotone, triangle_ok and the worst triangle ratio.
    """
    rng = np.random.default_rng(seed)
    s = np.sort(rng.uniform(0.0, s_max, samples))
    vals = np.asarray(g(s), dtype=float)
    pairs_a = rng.uniform(0.0, 0.5 * s_max, samples)
    pairs_b = rng.uniform(0.0, 0.5 * s_max, samples)
    lhs = np.asarray(g(pairs_a + pairs_b), dtype=float)
    rhs = g.c_g * np.asarray(g(pairs_a), dtype=float) * np.asarray(g(pairs_b), dtype=float)
    ratio = float(np.max(lhs / rhs))
    return {
        "min_value": float(vals.min()),
        "monotone": bool(np.all(np.diff(vals) >= -1e-12 * vals[:-1])),
        "triangle_ok": ratio <= 1.0 + 1e-9,
        "max_triangle_ratio": ratio,
    }


@dataclass
class KernelProjection:
    """Dense kernel of a projection sampled on a grid.

    The kernel is hermitized at construction; the pre-hermitization defect
    is kept for verify_projection. decay, when set, is an envelope pair
    (c, beta) asserting |K(x, y)| <= c exp(-beta |x - y|) on all entries.
    """

    kernel: np.ndarray
    grid: GridSpec
    decay: tuple = None
    hermiticity_defect: float = field(default=0.0, init=False)

    def __post_init__(self):
        k = np.asarray(self.kernel)
        n = self.grid.total_points
        if k.shape != (n, n):
            raise DimensionMismatch(f"kernel shape {k.shape} does not match grid with {n} points")
        if not np.issubdtype(k.dtype, np.complexfloating):
            k = k.astype(complex)
        self.hermiticity_defect = float(np.abs(k - k.conj().T).max()) if n else 0.0
        self.kernel = 0.5 * (k + k.conj().T)

    def trace(self):
        return float(np.real(np.trace(self.kernel)) * self.grid.weight)


def _radial_values(f, radii):
    vals = np.asarray(f(radii), dtype=float)
    if vals.shape != radii.shape:
        raise DimensionMismatch(f"weight returned shape {vals.shape} for {radii.shape} radii")
    return vals


def assemble_wf(p, f):
    """Compressed weight operator W = P f(X) P on the grid of p.

    f is a callable on arrays of radii with nonnegative values. Entries are
    W[i, j] = sum_m K[i, m] f(|x_m|) K[m, j] weight^2, computed in the
    factored form (K D^(1/2)) (K D^(1/2))^H so W is Hermitian positive
    semidefinite up to rounding.
    """
    vals = _radial_values(f, p.grid.radii())
    if np.any(vals < 0):
        raise ValueError("weight function must be nonnegative on the grid")
    half = np.sqrt(vals) * p.grid.weight
    b = p.kernel * half[None, :]
    return b @ b.conj().T


def eigendecompose(w, eigenvalues_only=False):
    """Full Hermitian eigensystem of w, eigenvalues descending.

    Returns (eigenvalues,) ordered largest first, plus the matching
    orthonormal eigenvector columns unless eigenvalues_only is set.
    """
    if eigenvalues_only:
        evals = np.linalg.eigvalsh(w)
        return evals[::-1].copy()
    evals, vecs = np.linalg.eigh(w)
    return evals[::-1].copy(), vecs[:, ::-1].copy()


@dataclass
class UgwbLevel:
    """One (near-)degenerate eigenvalue level of W_f."""

    lam: float
    radius: float
    mean_radius: float
    vectors: np.ndarray  # grid-normalized columns, one per degenerate state
    clamped: bool = False

    @property
    def multiplicity(self):
        return self.vectors.shape[1]


@dataclass
class Ugwb:
    """Eigenlevels of W_f with their concentration radii and the certificate M."""

    levels: list
    m_bound: float
    q: float
    grid: GridSpec
    f_kind: str = "exp_jbracket"
    overflow: bool = False
    fitted_beta: float = None
    beta_margin_ok: bool = None

    def lambdas(self):
        return np.array([lv.lam for lv in self.levels])

    def radii(self):
        return np.array([lv.radius for lv in self.levels])


def group_degeneracies(evals, vectors=None, rel_tol=1e-6, floor=None):
    """Cluster a descending spectrum into near-degenerate levels.

    Eigenvalues within rel_tol of the current group's anchor (its largest
    member) merge into one level; anything at or below floor is discarded.
    floor defaults to 1e-12 times the top eigenvalue. Returns a list of
    (lam, indices) with lam the group mean, largest levels first.
    """
    evals = np.asarray(evals, dtype=float)
    if evals.size == 0:
        return []
    if np.any(np.diff(evals) > 1e-12 * max(abs(evals[0]), 1.0)):
        raise ValueError("eigenvalues must be sorted in descending order")
    top = evals[0]
    if floor is None:
        floor = 1e-12 * top
    groups = []
    current = []
    anchor = None
    for idx, lam in enumerate(evals):
        if lam <= floor:
            break
        if anchor is not None and anchor - lam <= rel_tol * anchor:
            current.append(idx)
        else:
            if current:
                groups.append(current)
            current = [idx]
            anchor = lam
    if current:
        groups.append(current)
    return [(float(evals[g].mean()), list(g)) for g in groups]


def localization_integral(psi, radius, q, grid):
    """Two-sided localization functional of a grid-normalized state.

    Midpoint sum of exp(q |<x> - <r>|) |psi(x)|^2 over the grid; bounded by
    the certificate M of the generating projection when psi is a W_f
    eigenvector with matching radius r.
    """
    psi = np.asarray(psi)
    if psi.shape != (grid.total_points,):
        raise DimensionMismatch(f"state shape {psi.shape} does not match grid")
    mr = jbracket(float(radius))
    weight = np.exp(q * np.abs(jbracket(grid.radii()) - mr))
    return float(np.sum(weight * np.abs(psi) ** 2) * grid.weight)


def _hs_terms(p, f_vals, g_vals, block=512):
    # row contributions c_i = G_i^2 sum_j |K_ij|^2 f_j^2 w^2, blocked for memory
    w2 = p.grid.weight**2
    f2 = f_vals**2
    n = p.grid.total_points
    contrib = np.empty(n)
    for start in range(0, n, block):
        rows = p.kernel[start : start + block]
        contrib[start : start + block] = (np.abs(rows) ** 2 @ f2) * w2
    contrib *= g_vals**2
    # growth toward the boundary signals a divergent continuum norm
    order = np.argsort(p.grid.radii())
    dec = max(n // 10, 1)
    outer = contrib[order[-dec:]].mean()
    middle = contrib[order[(n - dec) // 2 : (n - dec) // 2 + dec]].mean()
    flagged = bool(outer > 3.0 * middle)
    return float(contrib.sum()), flagged


def hs_bound(p, f, g):
    """Localization certificate M = |G P f|_HS^2 + 1 on the grid.

    f and g are callables on radii (g typically a LocalizationFunction).
    Emits OverflowFlagWarning when the summand profile grows toward the
    grid boundary, the discrete shadow of a divergent continuum norm.
    """
    radii = p.grid.radii()
    f_vals = _radial_values(f, radii)
    g_vals = _radial_values(g, radii)
    m0, flagged = _hs_terms(p, f_vals, g_vals)
    if flagged:
        warnings.warn(
            "weighted kernel norm grows toward the grid boundary; "
            "the continuum bound is likely infinite for this weight rate",
            OverflowFlagWarning,
            stacklevel=2,
        )
    return m0 + 1.0


def build_ugwb(p, q, rel_tol=1e-6, floor=None):
    """Construct the eigenbasis of W = P exp(-q <X>) P with certificates.

    Runs assemble_wf, the full eigensystem, degeneracy grouping above the
    floor, the radius map per level, and the Hilbert-Schmidt bound. When p
    carries fitted decay metadata, the rate is checked against the margin
    beta >= 1.5 q; a shortfall raises BetaMarginWarning and is recorded.

    Eigenvectors are rescaled to unit grid norm (sum |psi|^2 weight = 1).
    """
    if q <= 0:
        raise ValueError(f"weight rate must be positive, got {q}")
    f = lambda s: np.exp(-q * jbracket(s))
    g = exponential_weight(q)

    fitted_beta = None
    margin_ok = None
    if p.decay is not None:
        fitted_beta = float(p.decay[1])
        margin_ok = fitted_beta >= 1.5 * q
        if not margin_ok:
            warnings.warn(
                f"weight rate q={q} is not below the fitted decay beta={fitted_beta:.4g} "
                f"with margin (need beta >= 1.5 q)",
                BetaMarginWarning,
                stacklevel=2,
            )

    w = assemble_wf(p, f)
    evals, vecs = eigendecompose(w)
    del w
    groups = group_degeneracies(evals, rel_tol=rel_tol, floor=floor)

    scale = p.grid.weight ** -0.5
    levels = []
    for lam, idx in groups:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RadiusClampWarning)
            radius = radius_from_lambda(lam, q)
        clamped = any(issubclass(c.category, RadiusClampWarning) for c in caught)
        levels.append(
            UgwbLevel(
                lam=lam,
                radius=radius,
                mean_radius=mean_radius_from_lambda(lam, q),
                vectors=vecs[:, idx] * scale,
                clamped=clamped,
            )
        )

    radii = p.grid.radii()
    m0, flagged = _hs_terms(p, _radial_values(f, radii), _radial_values(g, radii))
    return Ugwb(
        levels=levels,
        m_bound=m0 + 1.0,
        q=q,
        grid=p.grid,
        overflow=flagged,
        fitted_beta=fitted_beta,
        beta_margin_ok=margin_ok,
    )


def check_ugwb(u, p=None):
    """Invariant report for a constructed basis.

    Checks strictly decreasing level values, within-level grid
    orthonormality, the normalization identity
    sum exp(q (<r> - <x>)) |psi|^2 weight = 1, the localization integrals
    against m_bound, and (when the generating projection is supplied) the
    weighted eigenvector bound lam |G psi| <= sqrt(M - 1).
    """
    lams = u.lambdas()
    report = {
        "n_levels": len(u.levels),
        "lambdas_decreasing": bool(np.all(np.diff(lams) < 0)) if len(lams) > 1 else True,
        "m_bound": u.m_bound,
        "overflow": u.overflow,
        "beta_margin_ok": u.beta_margin_ok,
    }
    w = u.grid.weight
    radii = u.grid.radii()
    ortho_defect = 0.0
    norm_defect = 0.0
    loc_max = 0.0
    for lv in u.levels:
        gram = lv.vectors.conj().T @ lv.vectors * w
        ortho_defect = max(ortho_defect, float(np.abs(gram - np.eye(lv.multiplicity)).max()))
        mr = jbracket(lv.radius)
        shell = np.exp(u.q * (mr - jbracket(radii)))
        for col in range(lv.multiplicity):
            psi2 = np.abs(lv.vectors[:, col]) ** 2
            norm_defect = max(norm_defect, abs(float(np.sum(shell * psi2) * w) - 1.0))
            loc_max = max(
                loc_max, localization_integral(lv.vectors[:, col], lv.radius, u.q, u.grid)
            )
    report["orthonormality_defect"] = ortho_defect
    report["norm_identity_defect"] = norm_defect
    report["max_localization_integral"] = loc_max
    report["localization_bounded"] = loc_max <= u.m_bound

    if p is not None and u.levels:
        g_vals = np.exp(u.q * jbracket(radii))
        m0 = max(u.m_bound - 1.0, 0.0)
        worst = 0.0
        for lv in u.levels:
            g_norms = np.sqrt((g_vals[:, None] ** 2 * np.abs(lv.vectors) ** 2).sum(axis=0) * w)
            worst = max(worst, float(lv.lam * g_norms.max()))
        report["g_norm_ratio"] = worst / math.sqrt(m0) if m0 > 0 else math.inf
        report["g_norm_bounded"] = report["g_norm_ratio"] <= 1.0 + 1e-9
    passes = (
        report["lambdas_decreasing"]
        and report["orthonormality_defect"] <= 1e-8
        and report["localization_bounded"]
        and report.get("g_norm_bounded", True)
    )
    report["passes"] = bool(passes)
    return report


def verify_projection(p, tol=1e-6):
    """Report-only invariant check of a KernelProjection.

    Measures the stored hermiticity defect, the idempotency residual
    |K W K - K| in the max norm (with W the midpoint weight), and, when
    decay metadata is present, the worst envelope violation. The max
    residual of continuum kernels is dominated by a persistent boundary
    layer (edge cells lose most of their self-convolution mass to the
    outside), so the residual over bulk rows (points within half the box)
    is reported separately and is the one gating `passes`.
    """
    k = p.kernel
    n = p.grid.total_points
    resid = k @ k
    resid *= p.grid.weight
    resid -= k
    idem_max = float(np.abs(resid).max())
    bulk = np.max(np.abs(p.grid.points()), axis=1) <= 0.5 * p.grid.half_width
    idem_bulk = float(np.abs(resid[bulk]).max()) if bulk.any() else idem_max
    del resid
    report = {
        "hermiticity_defect": p.hermiticity_defect,
        "idempotency_max": idem_max,
        "idempotency_bulk": idem_bulk,
        "n_points": n,
    }
    decay_scale = 1.0
    violation = 0.0
    if p.decay is not None:
        c, beta = p.decay
        decay_scale = max(c, 1.0)
        pts = p.grid.points()
        for start in range(0, n, 512):
            rows = pts[start : start + 512]
            d = np.sqrt(((rows[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
            excess = np.abs(k[start : start + 512]) - c * np.exp(-beta * d)
            violation = max(violation, float(excess.max()))
        report["decay_violation"] = max(violation, 0.0)
    report["passes"] = bool(
        p.hermiticity_defect <= tol and idem_bulk <= tol and violation <= tol * decay_scale
    )
    return report


def recommended_half_width(q, r_max, floor):
    """Box size at which the weight has dropped to floor beyond the last shell.

    Advisory: half_width >= -ln(floor)/q + r_max keeps every retained
    level's shell a weight-decade clear of the boundary.
    """
    if not 0 < floor < 1:
        raise ValueError(f"floor must lie in (0, 1), got {floor}")
    if q <= 0 or r_max < 0:
        raise ValueError(f"need q > 0 and r_max >= 0, got q={q}, r_max={r_max}")
    return -math.log(floor) / q + r_max
