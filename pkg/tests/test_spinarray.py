import math

import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings, strategies as st

from superosc_rsp import specfun, spinarray as sa
from superosc_rsp.qft import FieldConfig
from superosc_rsp.transforms import SampledFunction

A = 1.0
CFG3 = FieldConfig(mass=1.0, dim=3)


def _gauss(centre, width):
    return sa.TargetProfile(lambda x: np.exp(-0.5 * ((x - centre) / width) ** 2),
                            (centre - 12 * width, centre + 12 * width), "gaussian")


def _outside(a, span=15.0, n=6001):
    x = np.linspace(-span, span, n)
    return x[np.abs(x) > a]


class TestReflectionSeries:
    def test_single_term(self):
        bump = lambda x: np.clip(1 - ((x - 2 * A) / (0.5 * A)) ** 2, 0, None) ** 3
        F = sa.TargetProfile(bump, (1.5 * A, 2.5 * A), "compact")
        w = sa.reflection_series_weights(F, A, 3)
        xi = np.linspace(0, 4, 801)
        assert np.array_equal(w.profile_1(xi), bump(xi + A))
        assert np.all(w.profile_2(xi) == 0)
        x = _outside(A)
        assert np.max(np.abs(w.array.field(x) - F(x))) == 0.0
        assert w.truncation_bound == 0.0

    def test_gaussian_at_3a(self):
        F = _gauss(3 * A, 0.5 * A)
        w = sa.reflection_series_weights(F, A, 8)
        x = _outside(A)
        assert np.max(np.abs(w.array.field(x) - F(x))) < 1e-10

    def test_even_target(self):
        F = sa.TargetProfile(lambda x: np.exp(-x * x / 8) * np.cos(x), (-20, 20), "gaussian")
        w = sa.reflection_series_weights(F, A, 6)
        xi = np.linspace(0, 10, 501)
        assert np.max(np.abs(w.profile_1(xi) - w.profile_2(xi))) < 1e-15

    @settings(max_examples=20, deadline=None)
    @given(st.floats(-6.0, 6.0), st.floats(0.3, 1.5), st.floats(-2.0, 2.0), st.integers(4, 10))
    def test_reconstruction(self, centre, width, amp, n_max):
        F = sa.TargetProfile(lambda x: amp * np.exp(-0.5 * ((x - centre) / width) ** 2),
                             (centre - 12 * width, centre + 12 * width), "gaussian")
        w = sa.reflection_series_weights(F, A, n_max)
        x = _outside(A, span=3 * (4 * n_max + 5) * A / 4)
        err = np.max(np.abs(w.array.field(x) - F(x)))
        assert err <= max(w.truncation_bound, 1e-14) * 1.001 + 1e-15

    def test_defect_confined(self):
        F = _gauss(2.5 * A, A)
        w = sa.reflection_series_weights(F, A, 8)
        inside = sa.defect_residual(w, F, A)
        assert np.max(np.abs(inside.values)) > 0.1
        x = _outside(A)
        assert np.max(np.abs(w.array.field(x) - F(x))) < 1e-14

    def test_symmetry_about_each_spin(self):
        F = _gauss(2.5 * A, A)
        w = sa.reflection_series_weights(F, A, 8)
        d = np.linspace(0, 5, 101)
        for xi, prof in zip(w.array.positions, w.array.profiles):
            assert np.array_equal(prof(np.abs(xi + d - xi)), prof(np.abs(xi - d - xi)))
        with pytest.raises(ValueError):
            w.profile_1(-0.1)

    def test_slow_decay(self):
        F = sa.TargetProfile(lambda x: 1.0 / (1.0 + x * x), (-5, 5), "power")
        with pytest.raises(sa.SlowDecayError):
            sa.reflection_series_weights(F, A, 8, tol=1e-6)
        assert sa.reflection_series_weights(F, A, 8).truncation_bound > 1e-4

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            sa.TargetProfile(np.sin, (0, 1), "fractal")
        with pytest.raises(ValueError):
            sa.reflection_series_weights(_gauss(3, 1), A, 0)


class TestSpinArray:
    def test_invariants(self):
        prof = SampledFunction([0.0, 1.0], [1.0, 0.0])
        with pytest.raises(ValueError):
            sa.SpinArray([0.0, 2.0], [prof, prof], (-1.0, 1.0))
        with pytest.raises(ValueError):
            sa.SpinArray([0.0], [SampledFunction([-1.0, 1.0], [1.0, 0.0])], (-1.0, 1.0))
        with pytest.raises(ValueError):
            sa.SpinArray([0.0], [prof, prof], (-1.0, 1.0))

    def test_transform(self):
        # triangle of half-width 1 at x0: transform sinc^2 times a phase
        prof = SampledFunction([0.0, 1.0], [1.0, 0.0])
        arr = sa.SpinArray([0.5], [prof], (0.0, 1.0))
        k = np.linspace(-20, 20, 81)
        sinc2 = np.sinc(k / (2 * np.pi)) ** 2
        assert np.max(np.abs(arr.transform(k) - sinc2 * np.exp(-0.5j * k))) < 1e-13


class TestCompensation:
    def _residual(self):
        F = _gauss(2.5 * A, A)
        w = sa.reflection_series_weights(F, A, 8)
        return sa.defect_residual(w, F, A)

    def test_zero(self):
        r = SampledFunction(np.linspace(-A, A, 101), np.zeros(101))
        res = sa.compensation_spins(r, 8)
        assert all(np.all(p.values == 0) for p in res.array.profiles)
        assert res.sup_after == 0.0

    def test_strict_decrease(self):
        r = self._residual()
        sups = [sa.compensation_spins(r, N).sup_after for N in (4, 8, 16)]
        assert sups[0] > sups[1] > sups[2]

    def test_monotone_sequence(self):
        r = self._residual()
        sups = [sa.compensation_spins(r, N).sup_after for N in (2, 4, 8, 16, 32)]
        assert all(b <= a for a, b in zip(sups, sups[1:]))

    def test_single_constant(self):
        r = SampledFunction(np.linspace(-A, A, 101), np.full(101, 0.3))
        res = sa.compensation_spins(r, 1)
        assert res.sup_after <= 0.5 * res.sup_before
        assert res.array.positions.tolist() == [0.0]

    def test_spin_field_matches_correction(self):
        r = self._residual()
        res = sa.compensation_spins(r, 8)
        x = r.grid
        interior = np.all(np.abs((x[:, None] + A) / (2 * A / 8) - np.arange(9)[None, :]) > 1e-6, axis=1)
        corrected = r.values + res.array.field(x)
        assert np.max(np.abs(corrected[interior] - res.corrected.values[interior])) < 1e-14
        assert res.log_penalty() == -8.0


class TestShellCondition:
    def test_identity_shell(self):
        t = sa.ylm_shell_condition(0, 0.5, 0.5, CFG3, 2.0, enforce_separation=False)
        assert np.allclose(t.band().values, 1.0, atol=1e-14)
        with pytest.raises(ValueError):
            sa.ylm_shell_condition(0, 0.5, 0.5, CFG3, 2.0)

    def test_point_source_limit(self):
        R = 3.0
        t = sa.ylm_shell_condition(0, 1e-6, R, CFG3, 10.0)
        band = t.band(257)
        k = CFG3.k_of(band.grid)
        assert np.max(np.abs(band.values - sp.spherical_jn(0, k * R))) < 1e-10

    def test_l1_near_zero(self):
        z = specfun.sph_bessel_first_zero(1)
        wc = 6.0
        kc = float(CFG3.k_of(wc))
        a0 = 0.9 * z / kc
        t = sa.ylm_shell_condition(1, a0, 3 * a0, CFG3, wc, enforce_separation=False)
        w = np.linspace(1e-3, wc, 32)
        k = CFG3.k_of(w)
        ref = sp.spherical_jn(1, 3 * a0 * k) / sp.spherical_jn(1, a0 * k)
        got = t(w)
        assert np.all(np.isfinite(got))
        assert np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1e-300)) < 1e-10
        assert t(0.0) == 3.0

    def test_zero_guard_error(self):
        z = specfun.sph_bessel_first_zero(2)
        wc = 6.0
        with pytest.raises(sa.ZeroGuardError):
            sa.ylm_shell_condition(2, 1.01 * z / float(CFG3.k_of(wc)), 10.0, CFG3, wc)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 12), st.floats(0.05, 0.999))
    def test_guard_invariant(self, l, frac):
        wc = 4.0
        a0 = frac * specfun.sph_bessel_first_zero(l) / float(CFG3.k_of(wc))
        try:
            t = sa.ylm_shell_condition(l, a0, a0 + 2.0, CFG3, wc)
        except sa.ZeroGuardError:
            return
        band = t.band(513)
        k = CFG3.k_of(band.grid)
        x = k[1:] * a0
        reduced = sp.spherical_jn(l, x) * sp.factorial2(2 * l + 1) / x ** l
        assert np.all(np.abs(reduced) >= 1e-12)
        ref = sp.spherical_jn(l, k[1:] * (a0 + 2.0)) / sp.spherical_jn(l, k[1:] * a0)
        ok = np.isfinite(ref)
        assert np.allclose(band.values[1:][ok], ref[ok], rtol=1e-8)
        assert np.all(np.isfinite(band.values))


class TestRadialWeight:
    def test_delta_shell_d1(self):
        cfg = FieldConfig(mass=1.0)
        t = sa.radial_weight_to_spectral([(2.0, 1.0)], cfg, 1, 10.0)
        band = t.band(101)
        assert np.allclose(band.values, 2 * np.cos(2.0 * cfg.k_of(band.grid)), atol=1e-14)

    def test_delta_shell_d3(self):
        R = 1.7
        t = sa.radial_weight_to_spectral([(R, 1.0)], CFG3, 3, 10.0)
        band = t.band(101)
        k = CFG3.k_of(band.grid)
        assert np.allclose(band.values, 4 * math.pi * R * R * sp.spherical_jn(0, k * R), atol=1e-12)
        shell = sa.ylm_shell_condition(0, 1e-9, R, CFG3, 10.0)
        ratio = band.values[1:] / shell.band(101).values[1:]
        assert np.allclose(ratio, 4 * math.pi * R * R, rtol=1e-9)

    def test_zero(self):
        t = sa.radial_weight_to_spectral(lambda r: np.zeros_like(r), CFG3, 3, 5.0, r_max=4.0)
        assert np.all(t.band(33).values == 0)

    @pytest.mark.parametrize("d,ref", [(2, lambda k: math.pi * np.exp(-k * k / 4)),
                                       (3, lambda k: math.pi ** 1.5 * np.exp(-k * k / 4))])
    def test_gaussian(self, d, ref):
        cfg = FieldConfig(mass=1.0, dim=d)
        t = sa.radial_weight_to_spectral(lambda r: np.exp(-r * r), cfg, d, 20.0, r_max=8.0)
        band = t.band(65)
        assert np.max(np.abs(band.values - ref(cfg.k_of(band.grid)))) < 1e-8

    def test_callable_needs_range(self):
        with pytest.raises(ValueError):
            sa.radial_weight_to_spectral(lambda r: r, CFG3, 3, 5.0)
        with pytest.raises(ValueError):
            sa.radial_weight_to_spectral([(1.0, 1.0)], CFG3, 4, 5.0)
