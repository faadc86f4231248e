"""Exact polynomial calculus on the unit disc."""

import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tubeflow.polydisc import (
    DiscPoly,
    TrigSeries,
    angular_derivative,
    differentiate,
    disc_integral,
    disc_integral_over_pi,
    disc_moment_over_pi,
    from_polar_fourier,
    laplacian,
    max_abs_difference,
    polar_fourier,
    restrict_to_boundary,
    scaled_radial_derivative,
)

from oracles import polar_quadrature_integral, trig_series_samples

Z2 = DiscPoly.z2()
Z3 = DiscPoly.z3()
RHO2 = DiscPoly.radius_sq()


def rational_polys(max_terms=6, max_deg=4):
    coeff = st.fractions(
        min_value=F(-9), max_value=F(9), max_denominator=8
    ).filter(lambda f: f != 0)
    mono = st.tuples(st.integers(0, max_deg), st.integers(0, max_deg))
    return st.dictionaries(mono, coeff, max_size=max_terms).map(DiscPoly)


class TestRingLaws:
    @settings(max_examples=60)
    @given(rational_polys(), rational_polys(), rational_polys())
    def test_mul_associative_and_distributive(self, a, b, c):
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c

    @settings(max_examples=60)
    @given(rational_polys(), rational_polys())
    def test_add_commutes_sub_inverts(self, a, b):
        assert a + b == b + a
        assert (a + b) - b == a

    def test_canonical_form_drops_zeros(self):
        p = DiscPoly({(1, 0): F(1)}) - DiscPoly({(1, 0): F(1)})
        assert p.is_zero() and p.coeffs == {}
        assert DiscPoly({(2, 1): 0}).is_zero()

    def test_power_and_degree(self):
        assert (RHO2**2).degree == 4
        assert RHO2**0 == DiscPoly.constant(1)
        with pytest.raises(ValueError):
            RHO2 ** (-1)

    def test_negative_exponent_rejected(self):
        with pytest.raises(ValueError):
            DiscPoly({(-1, 0): 1})


class TestDifferentiation:
    def test_examples(self):
        assert differentiate(Z2**2 * Z3, "z2") == 2 * Z2 * Z3
        assert differentiate(DiscPoly.constant(7), "z3").is_zero()
        assert laplacian(RHO2**2) == 16 * RHO2

    def test_unknown_variable(self):
        with pytest.raises(ValueError):
            differentiate(Z2, "z1")

    @settings(max_examples=40)
    @given(rational_polys(), rational_polys())
    def test_product_rule(self, a, b):
        lhs = differentiate(a * b, "z2")
        rhs = differentiate(a, "z2") * b + a * differentiate(b, "z2")
        assert lhs == rhs


class TestDiscIntegral:
    def test_area(self):
        assert disc_integral_over_pi(DiscPoly.constant(1)) == 1
        assert disc_integral(DiscPoly.constant(1.0)) == pytest.approx(math.pi)

    def test_even_moments_frozen(self):
        # frozen against the polar quadrature oracle
        assert disc_integral_over_pi(Z2**2) == F(1, 4)
        assert disc_integral_over_pi(Z2**2 * Z3**2) == F(1, 24)
        assert disc_integral_over_pi(Z2**4) == F(1, 8)

    def test_odd_moments_vanish(self):
        assert disc_moment_over_pi(1, 0) == 0
        assert disc_moment_over_pi(2, 3) == 0

    @pytest.mark.parametrize("poly", [
        Z2**2, Z2**2 * Z3**2, Z2**4, RHO2**3 - 2 * Z2 * Z3,
        (RHO2 - DiscPoly.constant(1)) * Z2**2,
    ])
    def test_against_quadrature_oracle(self, poly):
        assert disc_integral(poly) == pytest.approx(
            polar_quadrature_integral(poly), abs=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(rational_polys(max_terms=4, max_deg=3))
    def test_gauss_theorem(self, p):
        # int_disc lap p == boundary integral of the radial derivative
        lhs = disc_integral_over_pi(laplacian(p))
        boundary = restrict_to_boundary(scaled_radial_derivative(p))
        assert lhs == 2 * boundary.cos_coeff(0)


class TestBoundaryRestriction:
    def test_wall_factor_annihilates(self):
        q = 3 * Z2 * Z3**2 - 2 * RHO2 + DiscPoly.constant(F(1, 3))
        assert restrict_to_boundary((RHO2 - DiscPoly.constant(1)) * q).is_zero()

    def test_examples(self):
        t = restrict_to_boundary(Z2)
        assert t.cos_coeff(1) == 1 and len(t.modes) == 1
        t = restrict_to_boundary(Z2**2)
        assert t.cos_coeff(0) == F(1, 2)
        assert t.cos_coeff(2) == F(1, 2)

    def test_against_pointwise_evaluation(self):
        import numpy as np

        p = (Z2**3 * Z3 - 2 * Z3**2 + RHO2 * Z2).to_float()
        series = restrict_to_boundary(p)
        thetas = np.linspace(0.0, 2 * np.pi, 17)
        direct = [p.evaluate(np.cos(t), np.sin(t)) for t in thetas]
        assert trig_series_samples(series, thetas) == pytest.approx(direct)

    def test_trig_series_algebra(self):
        a = TrigSeries({0: [F(1), 0], 2: [F(1, 2), F(-1, 3)]})
        b = TrigSeries({2: [F(1, 2), F(-1, 3)]})
        assert (a - b) == TrigSeries({0: [F(1), 0]})
        assert not a.is_zero() and (a - a).is_zero()


class TestPolarConversions:
    @settings(max_examples=40)
    @given(rational_polys())
    def test_round_trip_identity(self, p):
        assert from_polar_fourier(polar_fourier(p)) == p

    def test_radial_form_round_trip(self):
        # a(s3^2) * s3 cos s2 style expression: (2 - rho^2) z2
        p = (DiscPoly.constant(F(2)) - RHO2) * Z2
        modes = polar_fourier(p)
        assert set(modes) == {("cos", 1)}
        assert modes[("cos", 1)] == {1: F(2), 3: F(-1)}
        assert from_polar_fourier(modes) == p

    def test_non_polynomial_mode_rejected(self):
        with pytest.raises(ValueError):
            from_polar_fourier({("cos", 2): {1: F(1)}})
        with pytest.raises(ValueError):
            from_polar_fourier({("sin", 1): {2: F(1)}})

    def test_angular_derivative_matches_fourier(self):
        # d/ds2 of s3^2 cos(2 s2) is -2 s3^2 sin(2 s2)
        p = Z2**2 - Z3**2
        modes = polar_fourier(angular_derivative(p))
        assert modes == {("sin", 2): {2: -2}}


def test_repr_is_readable():
    p = DiscPoly({(0, 0): F(1, 2), (2, 1): -3})
    text = repr(p)
    assert "z2^2" in text and "z3" in text and "1/2" in text
    assert repr(DiscPoly.zero()) == "0"


def test_max_abs_difference():
    a = DiscPoly({(1, 1): 1.0})
    b = DiscPoly({(1, 1): 1.0 + 1e-9, (0, 2): 1e-12})
    assert max_abs_difference(a, b) == pytest.approx(1e-9)
