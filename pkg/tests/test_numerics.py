import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from diffrelay.numerics import (QuadratureRule, bessel_j0, exp_integral_e1,
                                exp_scaled_e1, integrate_theta, theta_rule)

mpmath.mp.dps = 40


def j0_series(x, terms=60):
    """Independent power-series oracle sum_k (-1)^k (x^2/4)^k / (k!)^2."""
    q = mpmath.mpf(x) ** 2 / 4
    total = mpmath.mpf(1)
    term = mpmath.mpf(1)
    for k in range(1, terms):
        term *= -q / (k * k)
        total += term
    return total


def bisect_j0_root(lo=2.0, hi=3.0):
    for _ in range(80):
        mid = (lo + hi) / 2
        if j0_series(lo) * j0_series(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


class TestBesselJ0:
    def test_at_zero(self):
        assert bessel_j0(0.0) == 1.0

    def test_first_root(self):
        root = float(bisect_j0_root())
        assert abs(root - 2.404825557695773) < 1e-12
        assert abs(bessel_j0(2.404825557695773)) <= 1e-10

    def test_small_argument_series_oracle(self):
        x = 2 * math.pi * 0.001
        assert abs(bessel_j0(x) - float(j0_series(x))) < 1e-14
        assert bessel_j0(x) == pytest.approx(0.99999013, abs=1e-8)

    def test_accuracy_up_to_50(self):
        for x in np.linspace(0.05, 50.0, 431):
            exact = float(mpmath.besselj(0, mpmath.mpf(float(x))))
            assert abs(bessel_j0(float(x)) - exact) <= 1e-12

    def test_even_function(self):
        for x in (0.3, 2.7, 9.1, 33.0):
            assert bessel_j0(-x) == bessel_j0(x)

    def test_alternating_series_remainder(self):
        # truncation error of the partial sums is bounded by the first
        # omitted term for |x| <= 1
        for x in (0.1, 0.5, 1.0):
            exact = mpmath.besselj(0, mpmath.mpf(x))
            q = mpmath.mpf(x) ** 2 / 4
            partial = mpmath.mpf(1)
            term = mpmath.mpf(1)
            for k in range(1, 8):
                omitted = term * q / (k * k)
                assert abs(partial - exact) <= abs(omitted) + mpmath.mpf(10) ** -35
                term *= -q / (k * k)
                partial += term

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            bessel_j0(float("nan"))


class TestExpIntegral:
    def test_value_at_one(self):
        # adaptive quadrature of exp(-t)/t on [1, 100] as the oracle
        oracle, _ = quad(lambda t: math.exp(-t) / t, 1.0, 100.0, limit=200)
        assert abs(exp_integral_e1(1.0) - oracle) < 1e-10
        assert exp_integral_e1(1.0) == pytest.approx(0.2193839344, abs=1e-9)

    def test_value_at_half(self):
        oracle, _ = quad(lambda t: math.exp(-t) / t, 0.5, 100.0, limit=200)
        assert abs(exp_integral_e1(0.5) - oracle) < 1e-10
        assert exp_integral_e1(0.5) == pytest.approx(0.5597735948, abs=1e-9)

    def test_upper_bound(self):
        for x in (0.2, 1.0, 3.0, 10.0, 50.0, 300.0):
            assert exp_integral_e1(x) < math.exp(-x) / x

    def test_small_x_log_limit(self):
        x = 1e-6
        gamma = 0.5772156649015329
        assert abs(exp_integral_e1(x) + math.log(x) + gamma) < 1e-5

    def test_relative_accuracy_vs_mpmath(self):
        for x in np.logspace(-3, 2.5, 60):
            exact = float(mpmath.e1(mpmath.mpf(float(x))))
            assert abs(exp_integral_e1(float(x)) - exact) <= 1e-10 * exact

    def test_domain_error(self):
        with pytest.raises(ValueError):
            exp_integral_e1(0.0)
        with pytest.raises(ValueError):
            exp_integral_e1(-1.0)

    def test_scaled_variant_no_overflow(self):
        x = 5000.0
        val = exp_scaled_e1(x)
        # e^x E1(x) ~ 1/x for large x
        assert val == pytest.approx(1.0 / x, rel=1e-3)
        arr = exp_scaled_e1(np.array([0.5, 1.0, 10.0]))
        for xi, vi in zip([0.5, 1.0, 10.0], arr):
            assert vi == pytest.approx(math.exp(xi) * exp_integral_e1(xi), rel=1e-12)


class TestQuadrature:
    def test_weights_sum_to_two_pi(self):
        rule = theta_rule(201)
        assert abs(rule.weights.sum() - 2 * np.pi) <= 1e-12 * 2 * np.pi

    def test_nodes_increasing_inside_interval(self):
        rule = theta_rule(201)
        assert np.all(np.diff(rule.nodes) > 0)
        assert rule.nodes[0] > -np.pi and rule.nodes[-1] < np.pi

    def test_constant(self):
        assert integrate_theta(lambda t: np.ones_like(t)) == pytest.approx(
            2 * np.pi, rel=1e-14)

    def test_odd_function(self):
        assert abs(integrate_theta(np.sin)) <= 1e-12

    def test_rational_integrand_vs_trapezoid(self):
        f = lambda t: 1.0 / (1.0 + 0.5 * np.sin(t))
        grid = np.linspace(-np.pi, np.pi, 10**6 + 1)
        oracle = np.trapezoid(f(grid), grid)
        assert integrate_theta(f) == pytest.approx(oracle, rel=1e-9)

    def test_polynomial_exactness(self):
        rule = theta_rule(24)
        rng = np.random.default_rng(7)
        coeffs = rng.standard_normal(20)
        exact = sum(c * ((np.pi ** (k + 1)) - (-np.pi) ** (k + 1)) / (k + 1)
                    for k, c in enumerate(coeffs))
        val = integrate_theta(lambda t: sum(c * t**k for k, c in enumerate(coeffs)),
                              rule)
        assert val == pytest.approx(exact, rel=1e-12)

    def test_order_doubling_stability(self):
        f = lambda t: np.exp(-2.0 * (1.0 + 0.3 * np.sin(t)))
        a = integrate_theta(f, theta_rule(201))
        b = integrate_theta(f, theta_rule(402))
        assert abs(a - b) <= 1e-10 * abs(b)

    def test_rejects_bad_rules(self):
        rule = theta_rule(31)
        with pytest.raises(ValueError):
            QuadratureRule(nodes=rule.nodes[::-1], weights=rule.weights, order=31)
        with pytest.raises(ValueError):
            QuadratureRule(nodes=rule.nodes, weights=-rule.weights, order=31)
