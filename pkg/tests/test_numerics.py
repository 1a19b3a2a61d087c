import math
from fractions import Fraction

import numpy as np
import pytest

from borrowkit.numerics import (
    BracketError,
    GridSpec,
    IntegrationError,
    QuadratureSpec,
    beta_cdf,
    binomial_tail,
    bisect,
    integrate,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)
from oracles import beta_cdf_quad, binom_tail_exact, phi, phi_inv_bisect


class TestStdNormalCdf:
    def test_symmetry_point(self):
        assert std_normal_cdf(0.0) == 0.5

    def test_against_mpmath_erf(self):
        for z in [-3.7, -1.0, 0.3, 1.959964, 2.5, 5.0]:
            assert std_normal_cdf(z) == pytest.approx(phi(z), abs=1e-12)
        assert std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)

    def test_saturation(self):
        assert std_normal_cdf(-40.0) == 0.0
        assert std_normal_cdf(40.0) == 1.0

    def test_reflection_identity(self):
        zs = np.linspace(-8, 8, 201)
        np.testing.assert_allclose(std_normal_cdf(zs) + std_normal_cdf(-zs), 1.0, atol=1e-12)

    def test_monotone(self):
        zs = np.linspace(-10, 10, 2001)
        assert np.all(np.diff(std_normal_cdf(zs)) >= 0)


class TestStdNormalQuantile:
    def test_median(self):
        assert std_normal_quantile(0.5) == 0.0

    def test_against_bisection_oracle(self):
        assert std_normal_quantile(0.975) == pytest.approx(phi_inv_bisect(0.975), abs=1e-6)
        assert std_normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)

    def test_antisymmetry(self):
        assert std_normal_quantile(0.025) == pytest.approx(-std_normal_quantile(0.975), abs=1e-12)

    def test_roundtrip(self):
        for p in [1e-6, 0.025, 0.3, 0.5, 0.8, 0.975, 1 - 1e-6]:
            assert std_normal_cdf(std_normal_quantile(p)) == pytest.approx(p, abs=1e-10)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.4])
    def test_domain(self, p):
        with pytest.raises(ValueError):
            std_normal_quantile(p)


class TestBetaCdf:
    def test_uniform(self):
        assert beta_cdf(0.5, 1.0, 1.0) == pytest.approx(0.5, abs=1e-14)

    def test_against_quadrature(self):
        assert beta_cdf(0.3, 21.0, 21.0) == pytest.approx(beta_cdf_quad(0.3, 21, 21), abs=1e-8)
        assert beta_cdf(0.3, 10.001, 11.0) == pytest.approx(
            beta_cdf_quad(0.3, 10.001, 11.0), abs=1e-8
        )
        assert beta_cdf(0.3, 0.001, 1.0) == pytest.approx(beta_cdf_quad(0.3, 0.001, 1.0), abs=1e-8)

    def test_full_support(self):
        assert beta_cdf(1.0, 3.2, 0.7) == 1.0
        assert beta_cdf(0.0, 3.2, 0.7) == 0.0

    def test_reflection_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            x = rng.uniform(0, 1)
            a, b = rng.uniform(0.01, 50, size=2)
            assert beta_cdf(x, a, b) == pytest.approx(1.0 - beta_cdf(1.0 - x, b, a), abs=1e-10)

    def test_monotone_in_x(self):
        xs = np.linspace(0, 1, 500)
        assert np.all(np.diff(beta_cdf(xs, 2.5, 7.0)) >= 0)

    def test_domain(self):
        with pytest.raises(ValueError):
            beta_cdf(0.5, 0.0, 1.0)
        with pytest.raises(ValueError):
            beta_cdf(0.5, 1.0, -2.0)
        with pytest.raises(ValueError):
            beta_cdf(1.5, 1.0, 1.0)


class TestBinomialTail:
    def test_whole_support(self):
        assert binomial_tail(0, 17, 0.42) == 1.0

    def test_against_exact_rational(self):
        exact = float(binom_tail_exact(21, 40, Fraction(1, 2)))
        assert binomial_tail(21, 40, 0.5) == pytest.approx(exact, abs=1e-13)
        for k in range(0, 26):
            exact = float(binom_tail_exact(k, 25, Fraction(3, 10)))
            assert binomial_tail(k, 25, 0.3) == pytest.approx(exact, abs=1e-12)

    def test_empty_tail(self):
        assert binomial_tail(21, 20, 0.3) == 0.0

    def test_degenerate_theta(self):
        assert binomial_tail(0, 10, 0.0) == 1.0
        assert binomial_tail(1, 10, 0.0) == 0.0
        assert binomial_tail(10, 10, 1.0) == 1.0

    def test_monotone_in_y_and_theta(self):
        thetas = np.linspace(0.0, 1.0, 101)
        prev = np.ones_like(thetas) * 2
        for k in range(0, 22):
            tail = binomial_tail(k, 20, thetas)
            assert np.all(tail <= prev + 1e-15)
            assert np.all(np.diff(tail) >= -1e-12)
            prev = tail

    def test_range_check(self):
        with pytest.raises(ValueError):
            binomial_tail(-1, 10, 0.5)
        with pytest.raises(ValueError):
            binomial_tail(12, 10, 0.5)


class TestIntegrate:
    def test_constant(self):
        assert integrate(lambda x: 1.0, QuadratureSpec(21, 0.0, 1.0)) == pytest.approx(1.0, abs=1e-14)

    def test_gaussian_mass(self):
        spec = QuadratureSpec(201, -8.0, 8.0)
        expected = 2.0 * phi(8.0) - 1.0
        assert integrate(std_normal_pdf, spec) == pytest.approx(expected, abs=1e-10)

    def test_odd_function(self):
        assert integrate(lambda x: x, QuadratureSpec(64, -1.0, 1.0)) == pytest.approx(0.0, abs=1e-14)

    def test_polynomial_exactness(self):
        # degree 2k-1 polynomials are integrated exactly by a k-node rule
        coeffs = [0.3, -1.2, 0.8, 2.0, -0.5, 1.1, 0.25, -0.75]
        exact = sum(c / (p + 1) * (2.0 ** (p + 1) - 1.0) for p, c in enumerate(coeffs))
        got = integrate(
            lambda x: sum(c * x**p for p, c in enumerate(coeffs)), QuadratureSpec(4, 1.0, 2.0)
        )
        assert got == pytest.approx(exact, abs=1e-12)

    def test_node_doubling_stability(self):
        f = lambda x: std_normal_pdf(x) * (1 + np.tanh(x))  # noqa: E731
        a = integrate(f, QuadratureSpec(201, -8.0, 8.0))
        b = integrate(f, QuadratureSpec(402, -8.0, 8.0))
        assert abs(a - b) < 1e-12

    def test_nonfinite_integrand(self):
        with np.errstate(divide="ignore"), pytest.raises(IntegrationError):
            integrate(lambda x: 1.0 / (x - x), QuadratureSpec(11, 0.0, 1.0))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(1, 0.0, 1.0)
        with pytest.raises(ValueError):
            QuadratureSpec(10, 2.0, 1.0)
        with pytest.raises(ValueError):
            QuadratureSpec(10, 0.0, math.inf)


class TestBisect:
    def test_linear(self):
        assert bisect(lambda x: x - 2.0, 0.0, 10.0, tol=1e-12) == pytest.approx(2.0, abs=1e-11)

    def test_matches_quantile(self):
        root = bisect(lambda x: std_normal_cdf(x) - 0.975, 0.0, 5.0, tol=1e-12)
        assert root == pytest.approx(std_normal_quantile(0.975), abs=1e-10)

    def test_no_sign_change(self):
        with pytest.raises(BracketError):
            bisect(lambda x: x * x, 1.0, 2.0)

    def test_endpoint_root(self):
        assert bisect(lambda x: x, 0.0, 1.0) == 0.0


class TestGridSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            GridSpec(resolution=50)
        with pytest.raises(ValueError):
            GridSpec(span=4.0)
        assert GridSpec().resolution == 400
