import math

import numpy as np
import pytest
import scipy.integrate
import scipy.special

from ugwb.errors import NonConvergence
from ugwb.special_functions import (
    gauss_laguerre,
    integrate_adaptive,
    jbracket,
    laguerre,
    laguerre_sum,
)


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


class TestLaguerre:
    def test_closed_forms(self):
        for xi in (0.0, 0.3, 1.7, 9.2):
            assert laguerre(0, 0.0, xi) == 1.0
            assert _rel(laguerre(1, 0.0, xi), 1.0 - xi) < 1e-14
            assert _rel(laguerre(1, 2.5, xi), 3.5 - xi) < 1e-14
            assert _rel(laguerre(2, 0.0, xi), 1.0 - 2.0 * xi + 0.5 * xi * xi) < 1e-14

    def test_matches_explicit_sum(self):
        # two independent routes: three-term recurrence vs binomial sum
        rng = np.random.default_rng(20250817)
        for _ in range(200):
            n = int(rng.integers(0, 11))
            alpha = float(rng.choice(range(9))) if rng.random() < 0.7 else float(rng.uniform(0, 8))
            xi = float(rng.uniform(0.0, 12.0))
            assert _rel(laguerre(n, alpha, xi), laguerre_sum(n, alpha, xi)) < 1e-9

    def test_matches_scipy(self):
        xis = np.linspace(0.0, 20.0, 41)
        for n in range(9):
            for alpha in (0.0, 1.0, 2.5, 7.0):
                ref = scipy.special.eval_genlaguerre(n, alpha, xis)
                got = np.array([laguerre(n, alpha, x) for x in xis])
                assert np.max(np.abs(got - ref) / np.maximum(1.0, np.abs(ref))) < 1e-10

    def test_array_argument(self):
        xis = np.array([0.0, 1.0, 2.0])
        got = laguerre(2, 1.0, xis)
        want = np.array([laguerre(2, 1.0, float(x)) for x in xis])
        assert np.array_equal(got, want)


class TestJbracket:
    def test_against_extended_precision(self):
        xs = np.array([0.0, 1e-8, 1e-3, 0.5, 1.0, 3.0, 1e4, 1e8])
        hi = np.sqrt(1.0 + np.array(xs, dtype=np.longdouble) ** 2)
        got = jbracket(xs)
        assert np.max(np.abs(got - hi.astype(float)) / hi.astype(float)) < 1e-15

    def test_no_overflow(self):
        # hypot form survives squares that would overflow
        assert np.isfinite(jbracket(1e200))
        assert _rel(jbracket(1e200), 1e200) < 1e-15

    def test_floor_is_one(self):
        assert jbracket(0.0) == 1.0
        assert np.all(jbracket(np.linspace(0, 5, 50)) >= 1.0)


class TestGaussLaguerre:
    @pytest.mark.parametrize("m", [8, 16, 32])
    @pytest.mark.parametrize("alpha", [0.0, 2.0])
    def test_polynomial_exactness(self, m, alpha):
        # an m-point rule integrates xi^j exactly for j <= 2m - 1
        rule = gauss_laguerre(m, alpha)
        for j in (0, 1, m, 2 * m - 1):
            exact = math.gamma(j + alpha + 1.0)
            got = rule.integrate(lambda u: u**j)
            assert abs(got - exact) / exact < 1e-12

    def test_node_and_weight_shape(self):
        rule = gauss_laguerre(12, 0.0)
        assert rule.nodes.shape == (12,) and rule.weights.shape == (12,)
        assert np.all(np.diff(rule.nodes) > 0) and np.all(rule.nodes > 0)
        assert np.all(rule.weights > 0)
        assert abs(rule.weights.sum() - 1.0) < 1e-13  # Gamma(1)

    def test_weight_sum_alpha(self):
        rule = gauss_laguerre(20, 3.0)
        assert abs(rule.weights.sum() - math.gamma(4.0)) < 1e-11

    def test_invalid(self):
        with pytest.raises(ValueError):
            gauss_laguerre(0)
        with pytest.raises(ValueError):
            gauss_laguerre(8, alpha=-1.0)


class TestIntegrateAdaptive:
    def test_known_values(self):
        val, err = integrate_adaptive(lambda u: np.exp(-u), 1e-10)
        assert abs(val - 1.0) < 1e-10 and err < 1e-10

        val, _ = integrate_adaptive(lambda u: u * u * np.exp(-u), 1e-10, envelope=(1.0, 2, 1.0))
        assert abs(val - 2.0) < 1e-10

        val, _ = integrate_adaptive(lambda u: np.exp(-u) * np.cos(u), 1e-10)
        assert abs(val - 0.5) < 1e-10

    def test_gaussian_with_loose_envelope(self):
        # exp(-u^2) <= exp(1/4) exp(-u), so the default-rate envelope applies
        val, _ = integrate_adaptive(
            lambda u: np.exp(-u * u), 1e-11, envelope=(math.exp(0.25), 0, 1.0)
        )
        assert abs(val - 0.5 * math.sqrt(math.pi)) < 1e-11

    def test_agrees_with_scipy(self):
        f = lambda u: np.exp(-u) / (1.0 + u)
        ref, _ = scipy.integrate.quad(f, 0.0, np.inf, epsabs=1e-13, epsrel=1e-13)
        val, _ = integrate_adaptive(f, 1e-11)
        assert abs(val - ref) < 1e-10

    def test_agrees_with_gauss_laguerre(self):
        # entire integrand: the fixed rule converges superexponentially
        rule = gauss_laguerre(64, 0.0)
        ref = rule.integrate(np.cos)
        val, _ = integrate_adaptive(lambda u: np.exp(-u) * np.cos(u), 1e-12)
        assert abs(val - ref) < 1e-10

    def test_budget_exhaustion(self):
        with pytest.raises(NonConvergence):
            integrate_adaptive(lambda u: np.exp(-u) * np.cos(40.0 * u), 1e-14, max_evals=400)

    def test_tolerance_validation(self):
        with pytest.raises(ValueError):
            integrate_adaptive(lambda u: np.exp(-u), 0.0)
