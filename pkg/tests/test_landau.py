import math

import numpy as np
import pytest
import scipy.special

from ugwb.errors import InvalidLambda, RadiusClampWarning
from ugwb.landau import (
    kernel_truncation_index,
    lambda_bounds_n0,
    lambda_nk,
    landau_basis,
    landau_energy,
    mean_radius_from_lambda,
    projection_kernel,
    projection_kernel_matrix,
    radius_bracket_n0,
    radius_from_lambda,
    toeplitz_element,
)
from ugwb.operator_core import GridSpec
from ugwb.special_functions import gauss_laguerre, jbracket

# frozen from the adaptive quadrature at tol 1e-12, cross-checked against a
# 220-node generalized Gauss-Laguerre rule (agreement 2e-13)
LAMBDA_0K_Q1_B2 = [
    0.26303466315359,
    0.19727599736504,
    0.15307344157981,
    0.12180872855598,
    0.09883068950449,
    0.08143465403890,
]


def _raw_mesh(half_width, n):
    h = 2.0 * half_width / n
    axis = -half_width + h * (np.arange(n) + 0.5)
    xs, ys = np.meshgrid(axis, axis, indexing="ij")
    return np.stack([xs.ravel(), ys.ravel()], axis=-1), h


class TestBasis:
    def test_energy(self):
        assert landau_energy(0, 2.0) == 1.0
        assert landau_energy(3, 1.0) == 3.5
        with pytest.raises(ValueError):
            landau_energy(-1, 2.0)

    def test_orthonormal_on_fine_mesh(self):
        pts, h = _raw_mesh(8.0, 256)
        cols = [(0, 0), (0, 1), (0, 3), (1, 1), (1, -1), (2, 0)]
        phi = np.stack([landau_basis(n, k, 2.0, pts) for n, k in cols], axis=-1)
        gram = phi.conj().T @ phi * h * h
        assert np.abs(gram - np.eye(len(cols))).max() < 1e-6

    def test_matches_monomial_formula(self):
        rng = np.random.default_rng(7)
        pts = rng.uniform(-2.5, 2.5, (40, 2))
        b = 2.0
        z = np.sqrt(0.5 * b) * (pts[:, 0] + 1j * pts[:, 1])
        xi = 0.5 * b * (pts**2).sum(-1)
        for n in (0, 1, 2):
            for k in (0, 1, 4):
                want = (
                    math.sqrt(b / (2 * math.pi))
                    * math.sqrt(math.factorial(n) / math.factorial(n + k))
                    * z**k
                    * scipy.special.eval_genlaguerre(n, k, xi)
                    * np.exp(-0.5 * xi)
                )
                got = landau_basis(n, k, b, pts)
                assert np.abs(got - want).max() < 1e-12

    def test_negative_index_reflection(self):
        # phi_{n,-m} carries the same radial profile as phi_{n-m,m}
        pts, _ = _raw_mesh(4.0, 32)
        for n, m in [(1, 1), (2, 1), (3, 2)]:
            lhs = np.abs(landau_basis(n, -m, 2.0, pts))
            rhs = np.abs(landau_basis(n - m, m, 2.0, pts))
            assert np.abs(lhs - rhs).max() < 1e-13

    def test_level_validation(self):
        pts = np.zeros((3, 2))
        with pytest.raises(ValueError):
            landau_basis(-1, 0, 2.0, pts)
        with pytest.raises(ValueError):
            landau_basis(1, -2, 2.0, pts)
        with pytest.raises(ValueError):
            landau_basis(0, 0, -1.0, pts)
        with pytest.raises(ValueError):
            landau_basis(0, 0, 2.0, np.zeros((3, 3)))

    def test_large_k_stays_finite(self):
        pts, _ = _raw_mesh(6.0, 16)
        vals = landau_basis(0, 200, 2.0, pts)
        assert np.all(np.isfinite(vals))


class TestLambda:
    def test_frozen_reference_values(self):
        for k, want in enumerate(LAMBDA_0K_Q1_B2):
            assert abs(lambda_nk(0, k, 1.0, 2.0) - want) < 1e-10

    def test_reflection_identity(self):
        assert lambda_nk(1, -1, 1.0, 2.0) == lambda_nk(0, 1, 1.0, 2.0)
        assert lambda_nk(2, -1, 0.5, 1.0) == lambda_nk(1, 1, 0.5, 1.0)

    @pytest.mark.parametrize("q,b", [(0.5, 1.0), (1.0, 2.0), (2.0, 4.0)])
    def test_against_fixed_rule(self, q, b):
        # independent route: 220-node rule in the radial variable
        for n, k in [(0, 0), (0, 3), (1, 2), (2, 1)]:
            rule = gauss_laguerre(220, alpha=float(k))
            pref = math.exp(math.lgamma(n + 1) - math.lgamma(n + k + 1))

            def g(u):
                lag = scipy.special.eval_genlaguerre(n, k, u)
                return pref * np.exp(-q * jbracket(np.sqrt(2.0 * u / b))) * lag * lag

            ref = rule.integrate(g)
            assert abs(lambda_nk(n, k, q, b) - ref) / ref < 1e-9

    def test_monotone_in_k(self):
        lams = [lambda_nk(0, k, 1.0, 2.0) for k in range(12)]
        assert all(a > b for a, b in zip(lams, lams[1:]))

    def test_bounds_strict(self):
        for q in (0.5, 1.0, 2.0):
            for b in (1.0, 2.0, 4.0):
                for k in range(21):
                    lo, hi = lambda_bounds_n0(k, q, b)
                    lam = lambda_nk(0, k, q, b)
                    assert lo < lam < hi

    def test_grid_route_matches(self):
        # midpoint sums of the weighted basis reproduce the radial integral
        for k, want in enumerate(LAMBDA_0K_Q1_B2):
            t = toeplitz_element(0, k, k, 1.0, 2.0, 6.0, 64)
            assert abs(t.real - want) / want < 1e-8
            assert abs(t.imag) < 1e-14

    def test_validation(self):
        with pytest.raises(ValueError):
            lambda_nk(0, 0, -1.0, 2.0)
        with pytest.raises(ValueError):
            lambda_nk(0, -1, 1.0, 2.0)
        with pytest.raises(ValueError):
            lambda_nk(2, -3, 1.0, 2.0)


class TestRadiusMaps:
    def test_mean_radius_inverts_weight(self):
        for c in (1.0, 2.5, 7.0):
            for q in (0.5, 1.0, 2.0):
                assert abs(mean_radius_from_lambda(math.exp(-q * c), q) - c) < 1e-12

    def test_reference_radius(self):
        # ground-state weight at q=1, b=2 concentrates near r ~ 0.884
        r = radius_from_lambda(LAMBDA_0K_Q1_B2[0], 1.0)
        assert abs(r - 0.884) < 2e-3

    def test_radius_consistent_with_mean(self):
        lam = 0.1
        r = radius_from_lambda(lam, 1.0)
        assert abs(jbracket(r) - mean_radius_from_lambda(lam, 1.0)) < 1e-12

    def test_clamp_warns(self):
        with pytest.warns(RadiusClampWarning):
            r = radius_from_lambda(math.exp(-0.5), 1.0)
        assert r == 0.0

    def test_invalid_lambda(self):
        for bad in (0.0, -0.2, 1.5, math.nan):
            with pytest.raises(InvalidLambda):
                mean_radius_from_lambda(bad, 1.0)

    def test_bracket_contains_radius(self):
        for k in range(11):
            lam = lambda_nk(0, k, 1.0, 2.0)
            mr = mean_radius_from_lambda(lam, 1.0)
            mr_lo, mr_hi = radius_bracket_n0(k, 1.0, 2.0)
            assert mr_lo <= mr <= mr_hi


class TestToeplitz:
    def test_offdiagonal_small(self):
        pairs = [(k, kp) for k in range(6) for kp in range(6) if k != kp]
        worst = max(abs(toeplitz_element(0, k, kp, 1.0, 2.0, 6.0, 48)) for k, kp in pairs)
        assert worst < 1e-8

    def test_hermitian_pairing(self):
        t = toeplitz_element(1, 2, 0, 1.0, 2.0, 5.0, 40)
        tt = toeplitz_element(1, 0, 2, 1.0, 2.0, 5.0, 40)
        assert abs(t - tt.conjugate()) < 1e-14


class TestKernel:
    def test_truncation_tail_certified(self):
        # raising the cutoff beyond the certified index must not move values
        x = np.array([[1.8, -0.7]])
        y = np.array([[-0.4, 1.1]])
        loose = projection_kernel(0, 2.0, x, y, tol=1e-6)[0]
        tight = projection_kernel(0, 2.0, x, y, tol=1e-12)[0]
        assert abs(loose - tight) < 1e-6

    def test_truncation_index_monotone_in_radius(self):
        idx = [kernel_truncation_index(0, 2.0, r) for r in (1.0, 2.0, 4.0, 6.0)]
        assert all(a < b for a, b in zip(idx, idx[1:]))
        assert kernel_truncation_index(0, 2.0, 0.0) == 0

    def test_lowest_level_closed_form(self):
        # coherent-state kernel: (b/2pi) exp(b z wbar / 2 - b(|z|^2+|w|^2)/4)
        rng = np.random.default_rng(3)
        b = 2.0
        xs = rng.uniform(-2, 2, (25, 2))
        ys = rng.uniform(-2, 2, (25, 2))
        z = xs[:, 0] + 1j * xs[:, 1]
        w = ys[:, 0] + 1j * ys[:, 1]
        want = (
            b
            / (2 * math.pi)
            * np.exp(0.5 * b * z * w.conj() - 0.25 * b * (np.abs(z) ** 2 + np.abs(w) ** 2))
        )
        got = projection_kernel(0, b, xs, ys, tol=1e-12)
        assert np.abs(got - want).max() < 1e-10

    def test_diagonal_density(self):
        pts = np.array([[0.0, 0.0], [1.2, -0.5], [2.0, 2.0]])
        for n in (0, 1, 2):
            got = projection_kernel(n, 2.0, pts, pts, tol=1e-12)
            assert np.abs(got - 2.0 / (2 * math.pi)).max() < 1e-9

    def test_matrix_matches_pointwise(self):
        grid = GridSpec(dim=2, half_width=3.0, points_per_axis=12)
        mat = projection_kernel_matrix(1, 2.0, grid, tol=1e-10)
        pts = grid.points()
        ii, jj = np.meshgrid(np.arange(len(pts)), np.arange(len(pts)), indexing="ij")
        ptwise = projection_kernel(1, 2.0, pts[ii.ravel()], pts[jj.ravel()], tol=1e-10)
        assert np.abs(mat.ravel() - ptwise).max() < 1e-8

    def test_matrix_hermitian_and_peaked(self):
        grid = GridSpec(dim=2, half_width=4.0, points_per_axis=16)
        mat = projection_kernel_matrix(0, 2.0, grid)
        assert np.abs(mat - mat.conj().T).max() < 1e-12
        diag_min = np.real(np.diag(mat)).min()
        assert np.abs(mat).max() <= np.abs(mat).diagonal().max() + 1e-12
        assert diag_min > 0
