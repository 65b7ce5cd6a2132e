"""Landau level analytics: symmetric-gauge eigenfunctions, exact weights, radii.

The n-th Landau level of a uniform field b > 0 carries an angular-momentum
basis phi_{n,k}, k >= -n. Against the radial weight f(x) = exp(-q <x>) with
<x> = sqrt(1 + |x|^2), the compressed operator P_n f P_n is diagonal in this
basis; its eigenvalues lambda_{n,k} reduce to 1-d integrals that this module
evaluates to quadrature accuracy. Each eigenvalue maps to a concentration
radius r = sqrt((ln(lambda)/q)^2 - 1), realized by the basis states on
circles of slowly growing radius.
"""

import math
import warnings

import numpy as np

from .errors import InvalidLambda, RadiusClampWarning, TruncationWarning
from .special_functions import integrate_adaptive, jbracket, laguerre

__all__ = [
    "landau_energy",
    "landau_basis",
    "lambda_nk",
    "lambda_bounds_n0",
    "mean_radius_from_lambda",
    "radius_from_lambda",
    "radius_bracket_n0",
    "toeplitz_element",
    "kernel_truncation_index",
    "projection_kernel",
    "projection_kernel_matrix",
]


def landau_energy(n, b):
    """Energy of the n-th Landau level, (b / 2) (2n + 1)."""
    if n < 0 or b <= 0:
        raise ValueError(f"need n >= 0 and b > 0, got n={n}, b={b}")
    return 0.5 * b * (2 * n + 1)


def _check_level(n, k, b):
    if n < 0:
        raise ValueError(f"level index must be nonnegative, got {n}")
    if k < -n:
        raise ValueError(f"angular index must satisfy k >= -n, got k={k}, n={n}")
    if b <= 0:
        raise ValueError(f"field strength must be positive, got {b}")


def _radial_indices(n, k):
    # reduce (n, k) with k possibly negative to a degree/order pair with order >= 0
    if k >= 0:
        return n, k
    return n + k, -k


def landau_basis(n, k, b, points):
    """Evaluate phi_{n,k} at an array of plane points.

    For k >= 0, with z = x1 + i x2 and xi = b |x|^2 / 2,

        phi_{n,k}(x) = sqrt(b / 2 pi) sqrt(n! / (k+n)!)
                       (sqrt(b/2) z)^k  L_n^(k)(xi)  exp(-xi / 2),

    and for k = -m < 0 the conjugate-monomial form with indices (n-m, m)
    and a (-1)^m sign. Amplitudes are built by cumulative products so large
    k stays in floating range.

    Parameters
    ----------
    n, k : int
        Level and angular momentum, n >= 0, k >= -n.
    b : float
        Field strength.
    points : array_like, shape (..., 2)

    Returns
    -------
    ndarray, complex, shape (...)
    """
    _check_level(n, k, b)
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != 2:
        raise ValueError(f"points must have a trailing axis of length 2, got {pts.shape}")
    shape = pts.shape[:-1]
    pts = pts.reshape(-1, 2)
    xi = 0.5 * b * (pts[:, 0] ** 2 + pts[:, 1] ** 2)
    base = math.sqrt(b / (2.0 * math.pi)) * np.exp(-0.5 * xi)
    if k >= 0:
        w = math.sqrt(0.5 * b) * (pts[:, 0] + 1j * pts[:, 1])
        amp = np.ones(len(pts), dtype=complex)
        for j in range(1, k + 1):
            amp = amp * w / math.sqrt(n + j)
        out = base * amp * laguerre(n, k, xi)
    else:
        m = -k
        w = math.sqrt(0.5 * b) * (pts[:, 0] - 1j * pts[:, 1])
        amp = np.ones(len(pts), dtype=complex)
        for j in range(1, m + 1):
            amp = amp * w / math.sqrt(n - j + 1)
        out = (-1.0) ** m * base * amp * laguerre(n - m, m, xi)
    return out.reshape(shape)


def lambda_nk(n, k, q, b, tol=1e-10):
    """Eigenvalue of P_n exp(-q <x>) P_n on the angular sector k.

    Closed-form reduction to the radial line (u = b r^2 / 2):

        lambda_{n,k} = (n! / (k+n)!) int_0^inf exp(-q <sqrt(2u/b)>)
                       exp(-u) u^k L_n^(k)(u)^2 du,

    with negative k handled through the index reflection (n, -m) ->
    (n - m, m). Evaluated by adaptive quadrature to absolute tolerance tol.
    """
    _check_level(n, k, b)
    if q <= 0:
        raise ValueError(f"weight rate must be positive, got {q}")
    nr, al = _radial_indices(n, k)
    log_pref = math.lgamma(nr + 1) - math.lgamma(nr + al + 1)

    def integrand(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            logu = np.where(u > 0, np.log(np.maximum(u, 1e-300)), -np.inf)
        if al == 0:
            power = np.zeros_like(u)
        else:
            power = np.where(u > 0, al * logu, -np.inf)
        g = np.exp(log_pref + power - u)
        radial = np.exp(-q * jbracket(np.sqrt(2.0 * u / b)))
        return g * radial * laguerre(nr, al, u) ** 2

    # |L_nr^(al)(u)| <= binom(nr+al, nr) (2u)^nr for u >= 1, so the tail obeys
    # C u^(al + 2 nr) exp(-u) with the prefactor below.
    log_env = (
        -q
        + log_pref
        + 2.0 * (math.lgamma(nr + al + 1) - math.lgamma(nr + 1) - math.lgamma(al + 1))
        + 2.0 * nr * math.log(2.0)
    )
    value, _ = integrate_adaptive(
        integrand, tol, envelope=(math.exp(log_env), al + 2 * nr, 1.0)
    )
    return value


def lambda_bounds_n0(k, q, b):
    """Two-sided bound for the lowest-level eigenvalue lambda_{0,k}.

        exp(-q) (1 + 2q/b)^-(k+1)  <=  lambda_{0,k}  <=  exp(-q)
    """
    if k < 0:
        raise ValueError(f"lowest level needs k >= 0, got {k}")
    if q <= 0 or b <= 0:
        raise ValueError(f"need q > 0 and b > 0, got q={q}, b={b}")
    hi = math.exp(-q)
    lo = hi * (1.0 + 2.0 * q / b) ** (-(k + 1))
    return lo, hi


def mean_radius_from_lambda(lam, q):
    """Mean smoothed radius <r> = -ln(lambda) / q encoded by an eigenvalue."""
    if not 0.0 < lam <= 1.0:
        raise InvalidLambda(f"eigenvalue must lie in (0, 1], got {lam}")
    if q <= 0:
        raise ValueError(f"weight rate must be positive, got {q}")
    return -math.log(lam) / q


def radius_from_lambda(lam, q):
    """Concentration radius r with <r> = -ln(lambda) / q.

    Inverts sqrt(1 + r^2) = -ln(lambda) / q. Eigenvalues above exp(-q)
    encode a mean smoothed radius below 1, which no real radius attains;
    those are clamped to r = 0 with a RadiusClampWarning.
    """
    mr = mean_radius_from_lambda(lam, q)
    if mr < 1.0:
        warnings.warn(
            f"eigenvalue {lam:.6g} gives mean smoothed radius {mr:.6g} < 1; clamped to r=0",
            RadiusClampWarning,
            stacklevel=2,
        )
        return 0.0
    return math.sqrt(mr * mr - 1.0)


def radius_bracket_n0(k, q, b):
    """Bracket for the mean smoothed radius of the lowest-level state k.

        1  <=  <r_{0,k}>  <=  1 + ((k+1)/q) ln(1 + 2q/b)
    """
    if k < 0:
        raise ValueError(f"lowest level needs k >= 0, got {k}")
    if q <= 0 or b <= 0:
        raise ValueError(f"need q > 0 and b > 0, got q={q}, b={b}")
    return 1.0, 1.0 + (k + 1) / q * math.log(1.0 + 2.0 * q / b)


def toeplitz_element(n, k, kp, q, b, half_width, points_per_axis):
    """Matrix element <phi_{n,k}, exp(-q <x>) phi_{n,kp}> by midpoint summation.

    Diagonality of these elements in (k, kp) is what makes the compressed
    weight operator radial; off-diagonal values on an adequate grid sit at
    discretization level.
    """
    h = 2.0 * half_width / points_per_axis
    axis = -half_width + h * (np.arange(points_per_axis) + 0.5)
    xs, ys = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([xs.ravel(), ys.ravel()], axis=-1)
    f = np.exp(-q * jbracket(np.hypot(pts[:, 0], pts[:, 1])))
    left = landau_basis(n, k, b, pts)
    right = landau_basis(n, kp, b, pts)
    return complex(np.sum(np.conj(left) * f * right) * h * h)


def kernel_truncation_index(n, b, radius, tol=1e-10):
    """Smallest angular cutoff K whose dropped kernel tail is below tol.

    Entries of the level-n kernel restricted to |x|, |y| <= radius obey the
    term bound t_k = (b / 2 pi) (1 + u)^(2n) e^-u binom(n+k, n) u^k / k!
    with u = b radius^2 / 2. Returns the first K where the geometric
    remainder sum_{k > K} t_k falls below tol.
    """
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    if b <= 0 or n < 0:
        raise ValueError(f"need b > 0 and n >= 0, got b={b}, n={n}")
    u = 0.5 * b * radius * radius
    if u == 0.0:
        return 0
    log_a = math.log(b / (2.0 * math.pi)) + 2.0 * n * math.log1p(u) - u
    k = max(int(u), 1)
    for _ in range(200_000):
        ratio = u * (n + k + 2) / ((k + 2) * (k + 2))
        if ratio < 1.0:
            log_t = (
                log_a
                + math.lgamma(n + k + 2)
                - math.lgamma(n + 1)
                - math.lgamma(k + 2)
                + (k + 1) * math.log(u)
                - math.lgamma(k + 2)
            )
            tail = math.exp(log_t) / (1.0 - ratio) if log_t > -700 else 0.0
            if tail <= tol:
                return k
        k += 1
    raise RuntimeError("truncation index search did not terminate")


def projection_kernel(n, b, x, y, tol=1e-10):
    """Level-n projection kernel P_n(x, y) evaluated pointwise.

    x and y are matching arrays of plane points (shape (..., 2)); the sum
    over angular channels is truncated by kernel_truncation_index at the
    largest radius present, so values carry absolute error below tol.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.shape[-1] != 2:
        raise ValueError(f"point arrays must share a (..., 2) shape, got {xa.shape} and {ya.shape}")
    r_max = float(np.sqrt(max((xa**2).sum(-1).max(), (ya**2).sum(-1).max(), 0.0)))
    k_max = kernel_truncation_index(n, b, r_max, tol)
    out = np.zeros(xa.shape[:-1], dtype=complex)
    for k in range(-n, k_max + 1):
        out += landau_basis(n, k, b, xa) * np.conj(landau_basis(n, k, b, ya))
    return out


def projection_kernel_matrix(n, b, grid, tol=1e-10):
    """Dense level-n kernel on all point pairs of a square grid.

    grid provides points() (shape (npts, 2)) and half_width; the angular sum
    runs to the truncation index of the box corner. A TruncationWarning is
    raised when the corner tail bound cannot reach tol within floating range
    (it always can for the grids this package targets).
    """
    pts = np.asarray(grid.points(), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"level kernels require plane grids, got point shape {pts.shape}")
    r_max = float(np.sqrt((pts**2).sum(axis=1).max()))
    try:
        k_max = kernel_truncation_index(n, b, r_max, tol)
    except RuntimeError:
        warnings.warn(
            "angular truncation could not certify the requested tolerance",
            TruncationWarning,
            stacklevel=2,
        )
        k_max = 4 * int(0.5 * b * r_max * r_max) + 64
    cols = np.empty((len(pts), k_max + n + 1), dtype=complex)
    for idx, k in enumerate(range(-n, k_max + 1)):
        cols[:, idx] = landau_basis(n, k, b, pts)
    out = cols @ cols.conj().T
    return out
