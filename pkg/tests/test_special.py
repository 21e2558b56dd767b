import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from rfharvest import special


def quad_gaussian_tail(x):
    """Independent Q oracle: adaptive quadrature of the normal density."""
    value, _ = quad(lambda t: math.exp(-0.5 * t * t) / math.sqrt(2 * math.pi),
                    x, max(x, 0.0) + 42.0, epsabs=1e-300, epsrel=1e-13, limit=300)
    return value


def bisect(func, target, lo, hi, iterations=200):
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if func(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestGamma:
    def test_known_values(self):
        assert special.gamma(1.0) == pytest.approx(1.0, rel=1e-14)
        assert special.gamma(5.0) == pytest.approx(24.0, rel=1e-14)
        assert special.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            special.gamma(0.0)
        with pytest.raises(ValueError):
            special.gamma(-2.5)

    @pytest.mark.parametrize("m", [0.5, 1.0, 2.5, 5.0, 10.0])
    def test_recurrence(self, m):
        lhs = special.gamma(m + 1.0)
        assert abs(lhs - m * special.gamma(m)) / lhs <= 1e-12


class TestUpperIncompleteGamma:
    def test_alpha_one_is_exponential(self):
        assert special.upper_incomplete_gamma(1.0, 2.0) == pytest.approx(
            math.exp(-2.0), rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 5.0, 17.0, 50.0])
    def test_at_zero_is_gamma(self, alpha):
        assert special.upper_incomplete_gamma(alpha, 0.0) == pytest.approx(
            special.gamma(alpha), rel=1e-13)

    def test_against_quadrature_oracle(self):
        # Defining-integral oracle on [z, z+60]; the tail beyond is
        # smaller than 1e-20 of the value for these parameters.
        oracle, _ = quad(lambda t: t ** 4.0 * math.exp(-t), 3.7, 3.7 + 60.0,
                         epsabs=1e-300, epsrel=1e-13, limit=200)
        assert special.upper_incomplete_gamma(5.0, 3.7) == pytest.approx(oracle, rel=1e-9)

    def test_monotone_decreasing_and_regularized_range(self):
        for alpha in (0.5, 3.0, 20.0):
            z = np.linspace(0.0, 50.0, 101)
            values = np.array([special.upper_incomplete_gamma(alpha, zz) for zz in z])
            regularized = values / special.gamma(alpha)
            assert np.all(np.diff(values) <= 0.0)
            # Strict decrease wherever the decrement is resolvable in doubles.
            resolvable = regularized[:-1] < 1.0 - 1e-13
            assert np.all(np.diff(values)[resolvable] < 0.0)
            assert np.all((regularized >= 0.0) & (regularized <= 1.0))

    def test_vectorized_matches_scalar(self):
        z = np.array([0.0, 0.5, 3.0, 11.0, 60.0])
        vec = special.regularized_upper_gamma(4.0, z)
        scalar = [special.regularized_upper_gamma(4.0, zz) for zz in z]
        np.testing.assert_allclose(vec, scalar, rtol=1e-14)

    def test_interval_mass_stability(self):
        # Both endpoints deep in the saturated CDF region: the stable
        # path must agree with high-precision quadrature.
        alpha, z1, z2 = 5.0, 40.0, 45.0
        oracle, _ = quad(lambda t: t ** (alpha - 1) * math.exp(-t), z1, z2,
                         epsabs=1e-300, epsrel=1e-13)
        mass = special.gamma_interval_mass(alpha, z1, z2)
        assert mass == pytest.approx(oracle / special.gamma(alpha), rel=1e-9)

    def test_domain(self):
        with pytest.raises(ValueError):
            special.upper_incomplete_gamma(0.0, 1.0)
        with pytest.raises(ValueError):
            special.upper_incomplete_gamma(2.0, -1.0)


class TestQFunction:
    def test_at_zero(self):
        assert special.q_function(0.0) == pytest.approx(0.5, abs=1e-16)

    @pytest.mark.parametrize("x", [-7.0, -1.3, 0.4, 2.0, 6.5])
    def test_symmetry(self, x):
        assert special.q_function(x) + special.q_function(-x) == pytest.approx(
            1.0, abs=1e-14)

    @pytest.mark.parametrize("x", [0.1, 0.7, 1.5, 3.0, 5.0])
    def test_against_quadrature(self, x):
        assert abs(special.q_function(x) - quad_gaussian_tail(x)) <= 1e-14

    def test_ten_percent_point(self):
        # Bisection on the quadrature-evaluated integral locates the 10%
        # point near 1.2816.
        root = bisect(quad_gaussian_tail, 0.10, 0.0, 4.0)
        assert root == pytest.approx(1.2816, abs=5e-4)
        assert special.q_function(root) == pytest.approx(0.10, abs=1e-12)


class TestQInverse:
    def test_half(self):
        assert special.q_inverse(0.5) == pytest.approx(0.0, abs=1e-15)

    def test_round_trip(self):
        assert special.q_inverse(special.q_function(3.3)) == pytest.approx(
            3.3, abs=1e-10)

    def test_small_probability(self):
        x = special.q_inverse(1e-5)
        assert x == pytest.approx(4.2649, abs=1e-3)
        assert special.q_function(x) == pytest.approx(1e-5, abs=1e-10)
        # Newton result agrees with a bisection oracle on q_function.
        oracle = bisect(special.q_function, 1e-5, 0.0, 10.0)
        assert x == pytest.approx(oracle, abs=1e-10)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, p):
        with pytest.raises(ValueError):
            special.q_inverse(p)

    @given(st.floats(min_value=1e-9, max_value=1.0 - 1e-9))
    @settings(max_examples=200, deadline=None)
    def test_round_trip_property(self, p):
        assert special.q_function(special.q_inverse(p)) == pytest.approx(p, abs=1e-10)


class TestRFunctions:
    def test_limit_at_zero(self):
        assert special.r_function(1e-12) == pytest.approx(0.5, abs=1e-10)

    def test_composition(self):
        q3 = quad_gaussian_tail(3.0)
        assert special.r_function(3.0) == pytest.approx(2.0 * q3 * (1.0 - q3), rel=1e-12)

    def test_strictly_decreasing(self):
        x = np.linspace(0.01, 8.0, 400)
        values = np.array([special.r_function(xx) for xx in x])
        assert np.all(np.diff(values) < 0.0)

    def test_domain(self):
        with pytest.raises(ValueError):
            special.r_function(0.0)
        with pytest.raises(ValueError):
            special.r_inverse(0.5)
        with pytest.raises(ValueError):
            special.r_inverse(0.0)

    def test_round_trips(self):
        assert special.r_inverse(special.r_function(2.5)) == pytest.approx(
            2.5, abs=1e-9)
        for x in np.geomspace(1e-3, 8.0, 60):
            assert special.r_inverse(special.r_function(x)) == pytest.approx(
                x, abs=1e-9)
        for y in np.geomspace(1e-6, 0.499, 60):
            assert special.r_function(special.r_inverse(y)) == pytest.approx(
                y, abs=1e-9)

    def test_boundary_behavior(self):
        assert 0.0 < special.r_inverse(0.499999) < 2e-3

    def test_small_target_against_bisection(self):
        oracle = bisect(special.r_function, 1e-5, 1e-6, 10.0)
        assert special.r_inverse(1e-5) == pytest.approx(oracle, abs=1e-9)

    @given(st.floats(min_value=1e-3, max_value=8.0))
    @settings(max_examples=200, deadline=None)
    def test_inverse_property(self, x):
        assert special.r_inverse(special.r_function(x)) == pytest.approx(x, abs=1e-9)
