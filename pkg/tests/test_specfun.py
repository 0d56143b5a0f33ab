import math

import mpmath
import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from superosc_rsp import specfun


def _j0_series(x, terms=200):
    # plain power series in mpmath, used as an independent oracle
    x = mpmath.mpf(x)
    return mpmath.nsum(lambda k: (-1) ** k * (x / 2) ** (2 * k) / mpmath.factorial(k) ** 2, [0, mpmath.inf])


def _sph_zero_oracle(l, lo, hi):
    return brentq(lambda x: sp.spherical_jn(l, x), lo, hi, xtol=1e-15)


class TestBesselJ0:
    def test_origin(self):
        assert specfun.bessel_j0(0.0) == 1.0

    def test_first_zero(self):
        # Newton iteration on the power series
        mpmath.mp.dps = 30
        x = mpmath.mpf("2.4")
        for _ in range(20):
            x = x - _j0_series(x) / mpmath.diff(_j0_series, x)
        mpmath.mp.dps = 15
        assert abs(float(x) - 2.404825557695773) < 1e-14
        assert abs(specfun.bessel_j0(2.404825557695773)) < 1e-12

    def test_imaginary_axis(self):
        oracle = float(mpmath.besseli(0, 5))
        val = specfun.bessel_j0(5j)
        assert abs(val.imag) < 1e-12 * oracle
        assert abs(val.real - oracle) < 1e-12 * oracle
        assert abs(val.real - 27.2399) < 1e-4

    def test_complex_plane_against_scipy(self):
        rng = np.random.default_rng(1)
        z = rng.uniform(-50, 50, 400) + 1j * rng.uniform(-30, 30, 400)
        z = z[np.abs(z) <= 50]
        got = specfun.bessel_j0e(z)
        ref = sp.jve(0, z)
        assert np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1e-3)) < 1e-12

    def test_real_axis_matches_series(self):
        mpmath.mp.dps = 40
        for x in np.linspace(-50, 50, 41):
            ref = float(_j0_series(x))
            assert abs(specfun.bessel_j0(x) - ref) <= 1e-12 * max(abs(ref), 1e-2)
        mpmath.mp.dps = 15

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.0, 60.0))
    def test_imaginary_real_and_increasing(self, x):
        a = specfun.bessel_j0(1j * x)
        b = specfun.bessel_j0(1j * (x + 0.5))
        assert abs(a.imag) <= 1e-12 * abs(a.real)
        assert a.real >= 1.0
        assert b.real > a.real

    def test_scaled_form_far_out(self):
        z = 1e6 + 3e3j
        assert abs(specfun.bessel_j0e(z) - sp.jve(0, z)) < 1e-12

    def test_overflow_guard(self):
        with pytest.raises(OverflowError):
            specfun.bessel_j0(800j)
        with pytest.raises((OverflowError, ValueError)):
            specfun.bessel_j0e(2.0 * specfun.MAX_ARGUMENT)

    def test_deterministic(self):
        z = np.linspace(0, 40, 101) + 3j
        assert np.array_equal(specfun.bessel_j0e(z), specfun.bessel_j0e(z))


class TestSphBessel:
    def test_examples(self):
        assert abs(specfun.sph_bessel(0, math.pi)) < 1e-12
        assert specfun.sph_bessel(1, 0.0) == 0.0
        assert specfun.sph_bessel(0, 0.0) == 1.0
        assert abs(specfun.sph_bessel(2, 1.0) - 0.062035052) < 1e-9
        assert abs(specfun.sph_bessel(2, 1.0) - sp.spherical_jn(2, 1.0)) < 1e-15

    @pytest.mark.parametrize("l", [0, 1, 2, 5, 13, 30, 50])
    def test_against_scipy(self, l):
        x = np.linspace(0.0, 200.0, 2001)
        got = specfun.sph_bessel(l, x)
        ref = sp.spherical_jn(l, x)
        big = np.abs(ref) > 1e-6 * np.max(np.abs(ref))
        assert np.max(np.abs(got - ref)[big] / np.abs(ref[big])) < 1e-10
        assert np.max(np.abs(got - ref)) < 1e-12

    @settings(max_examples=80, deadline=None)
    @given(st.integers(1, 49), st.floats(0.5, 100.0))
    def test_recurrence(self, l, x):
        lhs = specfun.sph_bessel(l - 1, x) + specfun.sph_bessel(l + 1, x)
        rhs = (2 * l + 1) * specfun.sph_bessel(l, x) / x
        scale = max(abs(lhs), abs(rhs), abs(specfun.sph_bessel(l, x)), 1e-300)
        assert abs(lhs - rhs) <= 1e-9 * scale

    def test_order_guard(self):
        with pytest.raises(ValueError):
            specfun.sph_bessel(51, 1.0)
        with pytest.raises(ValueError):
            specfun.sph_bessel(-1, 1.0)


class TestSphZeros:
    def test_examples(self):
        assert abs(specfun.sph_bessel_first_zero(0) - math.pi) < 1e-10
        assert abs(specfun.sph_bessel_first_zero(1) - 4.493409458) < 1e-9
        assert abs(specfun.sph_bessel_first_zero(2) - 5.763459197) < 1e-9

    @pytest.mark.parametrize("l", [1, 2, 3, 7, 20, 50])
    def test_bisection_oracle(self, l):
        z = specfun.sph_bessel_first_zero(l)
        x = np.arange(1e-3, z, 1e-3)
        vals = sp.spherical_jn(l, x[x > 0.5 * l])
        lo = x[x > 0.5 * l][np.nonzero(vals > 0)[0][-1]]
        ref = _sph_zero_oracle(l, lo, z + 0.5)
        assert abs(z - ref) < 1e-10

    @pytest.mark.parametrize("l", [0, 1, 2, 4, 9, 25, 50])
    def test_no_earlier_zero(self, l):
        z = specfun.sph_bessel_first_zero(l)
        x = np.arange(1e-3, z - 1e-3, 1e-3)
        vals = specfun.sph_bessel(l, x)
        assert np.all(vals >= 0.0)
        assert np.all(vals[x > 1.0] > 0.0)


class TestK0:
    def test_unit_argument_quadrature_oracle(self):
        ref = float(mpmath.quadosc(lambda t: mpmath.cos(t) / mpmath.sqrt(t * t + 1), [0, mpmath.inf],
                                   period=2 * mpmath.pi))
        assert abs(ref - 0.421024438) < 1e-9
        assert abs(specfun.bessel_k0(1.0) - ref) < 1e-10 * ref

    def test_small_and_large(self):
        assert abs(specfun.bessel_k0(0.1) - 2.427069) < 1e-6
        assert specfun.bessel_k0(20.0) < 1e-9
        x = np.linspace(1, 60, 200)
        assert np.all(np.diff(specfun.bessel_k0(x)) < 0)

    def test_against_scipy(self):
        x = np.logspace(-6, 2, 400)
        assert np.max(np.abs(specfun.bessel_k0(x) / sp.k0(x) - 1)) < 1e-10

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_domain(self, x):
        with pytest.raises(ValueError):
            specfun.bessel_k0(x)
