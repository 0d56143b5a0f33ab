"""Spin arrays whose combined field reproduces a target profile.

In 1+1 dimensions two spins at ``+-a`` with reflection-series profiles
reproduce any fast-decreasing ``F`` outside ``[-a, a]``; compensation spins
inside the segment remove the remaining defect cell by cell.  In three
dimensions a spherical shell of spins carrying ``Y_lm`` weights needs the
window spectrum ``j_l(kR) / j_l(k a0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import qft, specfun, transforms
from .qft import FieldConfig
from .transforms import SampledFunction

DECAY_CLASSES = ("compact", "gaussian", "power")
ZERO_GUARD = 1e-12


class SlowDecayError(ValueError):
    pass


class ZeroGuardError(ValueError):
    def __init__(self, k, value):
        super().__init__(f"|j_l(k a0)| = {value:.3g} below {ZERO_GUARD:g} at k = {k:.6g}")
        self.k = k


@dataclass(frozen=True)
class TargetProfile:
    F: Callable
    support_hint: tuple = (-1.0, 1.0)
    decay_class: str = "gaussian"

    def __post_init__(self):
        if self.decay_class not in DECAY_CLASSES:
            raise ValueError(f"unknown decay class {self.decay_class!r}")

    def __call__(self, x):
        return self.F(np.asarray(x, dtype=float))


@dataclass
class SpinArray:
    """Spins at ``positions`` with radial profiles ``f_i(xi)``, ``xi = |x - x_i|``."""
    positions: np.ndarray
    profiles: list
    region: tuple

    def __post_init__(self):
        self.positions = np.atleast_1d(np.asarray(self.positions, dtype=float))
        if len(self.profiles) != self.positions.size:
            raise ValueError("one profile per spin is required")
        lo, hi = self.region
        if np.any(self.positions < lo) or np.any(self.positions > hi):
            raise ValueError("spin outside its region")
        for p in self.profiles:
            if p.grid[0] < 0:
                raise ValueError("profiles are functions of xi >= 0")

    def field(self, x):
        """Summed position-space contribution ``sum_i f_i(|x - x_i|)``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=np.result_type(*[p.values for p in self.profiles], float))
        for xi, p in zip(self.positions, self.profiles):
            out = out + p(np.abs(x - xi))
        return out

    def transform(self, k):
        """``W(k) = int field(x) e^{-ikx} dx`` (d = 1)."""
        k = np.asarray(k, dtype=float)
        out = np.zeros(k.shape, dtype=complex)
        for xi, p in zip(self.positions, self.profiles):
            g = p.grid
            half = 0.5 * (transforms.filon_linear(g, p.values, k) + transforms.filon_linear(g, p.values, -k))
            out = out + 2.0 * half * np.exp(-1j * k * xi)
        return out

    def __add__(self, other):
        lo = min(self.region[0], other.region[0])
        hi = max(self.region[1], other.region[1])
        return SpinArray(np.concatenate([self.positions, other.positions]),
                         list(self.profiles) + list(other.profiles), (lo, hi))


class RadialProfile:
    """Closed-form radial profile on ``xi >= 0``; ``grid``/``values`` sample it for transforms."""

    def __init__(self, func, xi_max, n=4097):
        self.func = func
        self.grid = np.linspace(0.0, xi_max, n)
        self.values = np.asarray(func(self.grid))

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        if np.any(xi < 0):
            raise ValueError("radial profiles take xi >= 0")
        return self.func(xi)


@dataclass
class ReflectionWeights:
    profile_1: RadialProfile
    profile_2: RadialProfile
    truncation_bound: float
    array: SpinArray


def _tail_sup(F: TargetProfile, start):
    """sup |F(y)| over ``|y| >= start``, sampled according to the decay class."""
    if F.decay_class == "compact":
        lo, hi = F.support_hint
        if start >= max(abs(lo), abs(hi)):
            return 0.0
    y = start * np.geomspace(1.0, 1e3, 2001)
    vals = np.maximum(np.abs(F(y)), np.abs(F(-y)))
    bound = float(np.max(vals))
    if F.decay_class == "power":
        # F ~ y^-p: the sampled window misses at most the far tail, itself below the last sample
        bound = max(bound, float(vals[-1]))
    return bound


def reflection_series_weights(F: TargetProfile, a: float, n_max: int, xi_max: Optional[float] = None,
                              n_xi: int = 4097, tol: Optional[float] = None) -> ReflectionWeights:
    """Profiles for spins at ``+a`` and ``-a`` reproducing ``F`` outside ``[-a, a]``.

    ``f1(xi) = sum_n F(xi + (4n+1)a) - F(-xi - (4n+3)a)`` and
    ``f2(xi) = sum_n F(-xi - (4n+1)a) - F(xi + (4n+3)a)`` for ``n = 0..n_max``.
    The sum telescopes, leaving ``F(x +- 4(n_max+1)a)`` outside the segment,
    so the truncation bound is ``sup |F|`` beyond ``(4 n_max + 5) a``.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if xi_max is None:
        lo, hi = F.support_hint
        xi_max = max(abs(lo), abs(hi)) + 2.0 * a
    def series(xi, s1, s2):
        xi = np.asarray(xi, dtype=float)
        out = 0.0
        for n in range(n_max + 1):
            out = out + F(s1 * (xi + (4 * n + 1) * a)) - F(s2 * (xi + (4 * n + 3) * a))
        return out

    bound = _tail_sup(F, (4 * n_max + 5) * a)
    if tol is not None and bound > tol:
        raise SlowDecayError(f"reflection series tail {bound:.3g} exceeds tol {tol:.3g} at n_max = {n_max}")
    p1 = RadialProfile(lambda xi: series(xi, 1.0, -1.0), xi_max, n_xi)
    p2 = RadialProfile(lambda xi: series(xi, -1.0, 1.0), xi_max, n_xi)
    return ReflectionWeights(p1, p2, bound, SpinArray([a, -a], [p1, p2], (-a, a)))


@dataclass
class CompensationResult:
    array: SpinArray
    sup_before: float
    sup_after: float
    corrected: SampledFunction

    def log_penalty(self, per_spin_log: float = -1.0):
        """Count-weighted log cost of the extra spins (relative units)."""
        return self.array.positions.size * per_spin_log


def compensation_spins(residual: SampledFunction, N: int, a: Optional[float] = None) -> CompensationResult:
    """``N`` spins at the centres of equal cells of ``[-a, a]`` cancelling the residual.

    A radial profile can only carry the part of the residual that is even
    about the spin, so spin ``j`` gets ``-(r(c_j + xi) + r(c_j - xi)) / 2`` for
    ``xi`` up to half a cell.  What survives is the odd part within each
    cell, which shrinks with the cell width for continuous residuals.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    x = residual.grid
    if a is None:
        a = max(abs(x[0]), abs(x[-1]))
    width = 2.0 * a / N
    centres = -a + width * (np.arange(N) + 0.5)
    profiles = []
    for c in centres:
        xi = np.linspace(0.0, 0.5 * width, 257)
        even = 0.5 * (residual(c + xi) + residual(c - xi))
        # close the profile at the cell edge so neighbours do not overlap
        xi = np.append(xi, np.nextafter(0.5 * width, np.inf))
        even = np.append(-even, 0.0)
        profiles.append(SampledFunction(xi, even))
    arr = SpinArray(centres, profiles, (-a, a))
    # each point lies in exactly one cell; evaluate there to avoid edge double counting
    cell = np.clip(np.floor((x + a) / width).astype(int), 0, N - 1)
    comp = np.array([profiles[j](np.abs(xv - centres[j])) for xv, j in zip(x, cell)])
    corrected = residual.values + comp
    return CompensationResult(arr, float(np.max(np.abs(residual.values))),
                              float(np.max(np.abs(corrected))), SampledFunction(x, corrected))


def defect_residual(weights: ReflectionWeights, F: TargetProfile, a: float, n: int = 2049) -> SampledFunction:
    """Mismatch ``sum_i f_i - F`` on ``[-a, a]``."""
    x = np.linspace(-a, a, n)
    return SampledFunction(x, weights.array.field(x) - F(x))


# --------------------------------------------------------------------------
# higher dimensions
# --------------------------------------------------------------------------

@dataclass
class SpectralTarget:
    """Desired window spectrum as a function of the offset frequency ``w'``."""
    func: Callable
    omega_c: float
    cfg: FieldConfig

    def __call__(self, omega_p):
        return self.func(np.asarray(omega_p, dtype=float))

    def band(self, n=1025):
        w = np.linspace(0.0, self.omega_c, n)
        return SampledFunction(w, np.asarray(self(w), dtype=complex))


def ylm_shell_condition(l: int, a0: float, R: float, cfg: FieldConfig, omega_c: float,
                        t0: float = 1.0, enforce_separation: bool = True) -> SpectralTarget:
    """Window spectrum ``j_l(kR) / j_l(k a0)`` for a ``Y_lm`` shell of radius ``a0``.

    Requires ``R > t0 + a0`` (unless ``enforce_separation`` is off) and
    ``a0 k(w_c)`` below the first zero of ``j_l`` so the ratio stays finite.
    """
    if l < 0 or not a0 > 0:
        raise ValueError("need l >= 0 and a0 > 0")
    if enforce_separation and not R > t0 + a0:
        raise ValueError(f"target radius R = {R} must exceed t0 + a0 = {t0 + a0}")
    k_c = float(cfg.k_of(omega_c))
    z = specfun.sph_bessel_first_zero(l)
    if a0 * k_c >= z:
        raise ZeroGuardError(z / a0, 0.0)
    ratio0 = (R / a0) ** l

    log_dfact = math.lgamma(2 * l + 2) - l * math.log(2.0) - math.lgamma(l + 1)

    def series(x):
        y = -0.5 * x * x
        term = np.ones_like(y)
        acc = term.copy()
        for n in range(1, 30):
            term = term * y / (n * (2 * l + 2 * n + 1))
            acc = acc + term
        return acc

    def func(omega_p):
        # ratio of reduced functions (2l+1)!! j_l(x) / x^l, which tend to 1
        # at the origin, so the k^l decay of j_l there is not mistaken for
        # the zero the guard protects against
        k = np.atleast_1d(np.asarray(cfg.k_of(omega_p), dtype=float))
        xa, xr = k * a0, k * R
        den = np.empty(k.shape)
        lo = xa < 1.0
        den[lo] = series(xa[lo])
        den[~lo] = specfun.sph_bessel(l, xa[~lo]) * np.exp(log_dfact - l * np.log(xa[~lo]))
        bad = np.abs(den) < ZERO_GUARD
        if np.any(bad):
            idx = int(np.argmax(bad))
            raise ZeroGuardError(float(k[idx]), float(specfun.sph_bessel(l, xa[idx])))
        num = np.empty(k.shape)
        lo = xr < 1.0
        num[lo] = ratio0 * series(xr[lo])
        num[~lo] = specfun.sph_bessel(l, xr[~lo]) * np.exp(log_dfact - l * np.log(xa[~lo]))
        out = num / den
        return out if np.ndim(omega_p) else float(out[0])

    return SpectralTarget(func, omega_c, cfg)


def radial_weight_to_spectral(f, cfg: FieldConfig, d: int, omega_c: float,
                              r_max: Optional[float] = None, n_r: int = 8193) -> SpectralTarget:
    """Window spectrum for a radially symmetric spin weight ``f(r)``.

    ``int dr f(r) k (2 pi r / k)^{d/2} J_{(d-2)/2}(kr)``, i.e. kernels
    ``2 cos(kr)``, ``2 pi r J0(kr)``, ``4 pi r^2 j0(kr)`` for d = 1, 2, 3.
    ``f`` is a callable on ``[0, r_max]`` or a list of ``(radius, weight)``
    delta shells.
    """
    if d not in (1, 2, 3):
        raise ValueError("d must be 1, 2 or 3")

    def kernel(k, r):
        if d == 1:
            return 2.0 * np.cos(k * r)
        if d == 2:
            return 2.0 * math.pi * r * np.real(specfun.bessel_j0(k * r + 0j))
        return 4.0 * math.pi * r * r * specfun.sph_bessel(0, k * r)

    if callable(f):
        if r_max is None:
            raise ValueError("r_max is required for a callable profile")

        def func(omega_p):
            k = np.atleast_1d(cfg.k_of(omega_p))
            out = qft.radial_transform(f, r_max, k, d, n_r)
            return out if np.ndim(omega_p) else complex(out[0])
    else:
        shells = [(float(r), complex(w)) for r, w in f]

        def func(omega_p):
            k = np.atleast_1d(cfg.k_of(omega_p))
            out = np.zeros(k.shape, dtype=complex)
            for r, w in shells:
                out = out + w * kernel(k, r)
            return out if np.ndim(omega_p) else complex(out[0])

    return SpectralTarget(func, omega_c, cfg)
