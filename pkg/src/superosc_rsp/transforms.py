"""Quadrature, time/frequency transforms, smoothing and local-frequency tools.

Frequency convention throughout: ``spec(w) = int eps(t) exp(i w t) dt``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import specfun


class QuadratureError(RuntimeError):
    """Adaptive subdivision ran out of budget before reaching the tolerance."""


class AliasingError(ValueError):
    """Spectral samples are too coarse to follow the phase."""


class KernelTooWideError(ValueError):
    pass


@dataclass(frozen=True)
class SampledFunction:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("SampledFunction needs at least two grid points")
        if grid.shape != values.shape:
            raise ValueError("grid and values lengths differ")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("SampledFunction values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        re = np.interp(x, self.grid, self.values.real, left=0.0, right=0.0)
        im = np.interp(x, self.grid, self.values.imag, left=0.0, right=0.0)
        return re + 1j * im


# --------------------------------------------------------------------------
# adaptive Gauss-Kronrod (7/15)
# --------------------------------------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk_panels(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=complex).reshape(x.shape)
    k = half * (fx @ _KRONROD)
    g = half * (fx @ _GAUSS)
    return k, np.abs(k - g)


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    panels: int


def integrate(f: Callable, a: float, b: float, tol: float = 1e-10,
              phase_rate: float = 0.0, max_panels: int = 2 ** 20) -> QuadResult:
    """Adaptive Gauss-Kronrod quadrature of a vectorized integrand on ``[a, b]``.

    ``phase_rate`` is the largest oscillation rate of the integrand (radians per
    unit of ``x``); the interval is pre-split so that no panel advances the
    phase by more than pi/2.  Panels with the worst error estimate are bisected
    until the summed estimate drops below ``tol``.
    """
    if not b > a:
        raise ValueError("integrate: need a < b")
    if not tol > 0:
        raise ValueError("integrate: tol must be positive")
    n0 = max(1, int(math.ceil(abs(phase_rate) * (b - a) / (0.5 * math.pi))))
    if n0 > max_panels:
        raise QuadratureError(f"integrate: {n0} panels needed to resolve the phase")
    edges = np.linspace(a, b, n0 + 1)
    lo, hi = edges[:-1], edges[1:]
    val, err = _gk_panels(f, lo, hi)
    # batched refinement: bisect every panel above its share of the tolerance
    done_val = 0.0 + 0.0j
    done_err = 0.0
    panels = n0
    while True:
        total_err = done_err + err.sum()
        if total_err <= tol:
            return QuadResult(complex(done_val + val.sum()), float(total_err), panels)
        share = tol * (hi - lo) / (b - a)
        bad = err > share
        if not bad.any():
            bad = err >= err.max()
        done_val += val[~bad].sum()
        done_err += err[~bad].sum()
        lo_b, hi_b = lo[bad], hi[bad]
        mid = 0.5 * (lo_b + hi_b)
        if np.any(mid <= lo_b) or np.any(mid >= hi_b):
            raise QuadratureError("integrate: panels shrank to machine resolution")
        panels += lo_b.size
        if panels > max_panels:
            raise QuadratureError(
                f"integrate: subdivision budget of {max_panels} panels exhausted "
                f"(error estimate {total_err:.3e} > tol {tol:.3e})")
        lo = np.concatenate([lo_b, mid])
        hi = np.concatenate([mid, hi_b])
        val, err = _gk_panels(f, lo, hi)


# --------------------------------------------------------------------------
# Fourier transforms
# --------------------------------------------------------------------------

def fourier_time_to_freq(window, omega_grid, tol: float = 1e-12, max_panels: int = 2 ** 20):
    """Direct quadrature of ``int eps(t) exp(i w t) dt`` over the window support.

    ``window`` needs a vectorized ``__call__(t)`` and a ``support`` pair.  When
    ``window.endpoint_singular`` is true (inverse square-root endpoint
    singularities) the substitution ``t = c + r sin(theta)`` removes them.
    Returns a :class:`SampledFunction` over ``omega_grid``.
    """
    omegas = np.asarray(omega_grid, dtype=float)
    return SampledFunction(omegas, fourier_values(window, omegas, tol, max_panels))


def fourier_values(window, omegas, tol: float = 1e-12, max_panels: int = 2 ** 20):
    """Array form of :func:`fourier_time_to_freq` (any number of frequencies)."""
    lo, hi = window.support
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    out = np.empty(omegas.size, dtype=complex)
    singular = getattr(window, "endpoint_singular", False)
    centre, radius = 0.5 * (lo + hi), 0.5 * (hi - lo)
    own = getattr(window, "phase_rate", 0.0)
    for i, w in enumerate(omegas):
        if singular:
            def integrand(theta, w=w):
                t = centre + radius * np.sin(theta)
                return window(t) * np.exp(1j * w * t) * radius * np.cos(theta)
            res = integrate(integrand, -0.5 * math.pi, 0.5 * math.pi, tol=tol,
                            phase_rate=(abs(w) + own) * radius + 1.0, max_panels=max_panels)
        else:
            res = integrate(lambda t, w=w: window(t) * np.exp(1j * w * t), lo, hi,
                            tol=tol, phase_rate=abs(w) + own, max_panels=max_panels)
        out[i] = res.value
    return out


def _panel_moments(theta):
    """``int_0^1 e^{i theta u} du`` and ``int_0^1 u e^{i theta u} du``."""
    small = np.abs(theta) < 0.5
    th = np.where(small, 1.0, theta)
    e = np.exp(1j * th)
    m0 = (e - 1.0) / (1j * th)
    m1 = (1j * th * e - (e - 1.0)) / (1j * th) ** 2
    if small.any():
        z = 1j * theta[small]
        s0 = np.zeros_like(z)
        s1 = np.zeros_like(z)
        term = np.ones_like(z)
        for k in range(14):
            if k:
                term = term * z / k
            s0 = s0 + term / (k + 1)
            s1 = s1 + term / (k + 2)
        m0[small] = s0
        m1[small] = s1
    return m0, m1


_FILON_BLOCK = 2 ** 21


def filon_weights(grid, omegas):
    """Matrix ``W`` with ``W @ values`` equal to :func:`filon_linear` of ``values``."""
    t = np.asarray(grid, dtype=float)
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    dt = np.diff(t)
    # uniform grids share one pair of panel moments per frequency
    if np.all(np.abs(dt - dt[0]) <= 1e-10 * abs(dt[0])):
        m0, m1 = _panel_moments(w[:, None] * dt[0])
    else:
        m0, m1 = _panel_moments(w[:, None] * dt[None, :])
    e = np.exp(1j * w[:, None] * t[None, :-1]) * dt
    out = np.zeros((w.size, t.size), dtype=complex)
    out[:, :-1] += e * (m0 - m1)
    out[:, 1:] += e * m1
    return out


def filon_linear(grid, values, omegas):
    """Exact Fourier transform of the piecewise-linear interpolant of samples.

    The interpolant is zero outside ``[grid[0], grid[-1]]``.  ``values`` may
    be 2-D with one column per function, which shares the weight matrix.
    """
    t = np.asarray(grid, dtype=float)
    v = np.asarray(values, dtype=complex)
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    out = np.empty((w.size,) + v.shape[1:], dtype=complex)
    step = max(1, _FILON_BLOCK // t.size)
    for lo in range(0, w.size, step):
        out[lo:lo + step] = filon_weights(t, w[lo:lo + step]) @ v
    return out if np.ndim(omegas) else out[0]


# --------------------------------------------------------------------------
# smoothing kernel
# --------------------------------------------------------------------------

def _double_factorial_odd(n):
    return float(np.prod(np.arange(1, 2 * n + 2, 2, dtype=float))) if n > 0 else 1.0


@dataclass(frozen=True)
class SmoothingKernel:
    """Unit-mass bump ``C (1 - u^2)^n`` with ``u = (2t + width)/width``.

    Supported on ``[-width, 0]`` so that smoothing never reaches past ``t = 0``.
    The kernel is ``n - 1`` times continuously differentiable and its
    transform decays like ``w^-(n+1)``.
    """
    width: float
    order: int = 2

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("kernel width must be positive")
        if self.order < 0:
            raise ValueError("kernel order must be >= 0")

    @property
    def norm(self):
        n = self.order
        return _double_factorial_odd(n) / (self.width * math.factorial(n) * 2.0 ** n)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        u = (2.0 * t + self.width) / self.width
        inside = np.abs(u) <= 1.0
        return np.where(inside, self.norm * np.clip(1.0 - u * u, 0.0, None) ** self.order, 0.0)

    def spectrum(self, omega):
        """``(2n+1)!! j_n(x) / x^n`` with ``x = w width / 2``, times the centring phase."""
        w = np.asarray(omega, dtype=float)
        x = np.abs(w) * 0.5 * self.width
        n = self.order
        small = x < 1e-6
        xs = np.where(small, 1.0, x)
        body = _double_factorial_odd(n) * specfun.sph_bessel(n, xs) / xs ** n
        body = np.where(small, 1.0 - x * x / (2.0 * (2 * n + 3)), body)
        return body * np.exp(-0.5j * w * self.width)


def convolve(window, kernel: SmoothingKernel, max_fraction: float = 1.0 / 20.0):
    """Smooth a window with a compact kernel; returns a new window.

    Raises :class:`KernelTooWideError` when ``kernel.width > t0 / 20``.
    """
    from .windows import SmoothedWindow

    if kernel.width > max_fraction * window.t0 * (1.0 + 1e-12):
        raise KernelTooWideError(
            f"kernel width {kernel.width} exceeds t0/20 = {window.t0 * max_fraction}")
    return SmoothedWindow(window, kernel)


# --------------------------------------------------------------------------
# local frequency estimators
# --------------------------------------------------------------------------

_SIGN_FLIP = math.pi * (1.0 - 1e-6)
_ALIAS_LIMIT = 0.9 * math.pi


def local_frequency(s: SampledFunction) -> np.ndarray:
    """Centered estimate of ``d arg s / dw`` after phase unwrapping.

    Exact sign flips of an otherwise real-phase signal (jumps of pi) are not
    phase advances; estimates touching them are returned as NaN.  Any other
    neighbour jump above 0.9 pi raises :class:`AliasingError`.
    """
    x = s.grid
    ratio = s.values[1:] * np.conj(s.values[:-1])
    dphi = np.angle(ratio)
    flip = np.abs(dphi) >= _SIGN_FLIP
    if np.any(np.abs(dphi[~flip]) > _ALIAS_LIMIT):
        i = int(np.argmax(np.where(flip, 0.0, np.abs(dphi))))
        raise AliasingError(f"phase jump {dphi[i]:.3f} rad between w={x[i]:.6g} and {x[i + 1]:.6g}")
    dphi = np.where(flip, 0.0, dphi)
    phase = np.concatenate([[0.0], np.cumsum(dphi)])
    est = np.gradient(phase, x)
    bad = np.zeros(x.size, dtype=bool)
    bad[:-1] |= flip
    bad[1:] |= flip
    return np.where(bad, np.nan, est)


def _teager(u, x):
    du = np.gradient(u, x)
    ddu = np.gradient(du, x)
    return du * du - u * ddu, du


def oscillation_rate(s: SampledFunction, centre: float = 0.0) -> np.ndarray:
    """Energy-operator estimate of the local oscillation rate.

    The signal is demodulated by ``exp(-i w centre)`` and the Teager-Kaiser
    ratio ``Psi(u') / Psi(u)`` is formed from the real and imaginary parts
    together, which equals ``nu^2`` for ``exp(i nu w)`` and for ``cos(nu w)``
    alike.  Measures how far from ``centre`` the local content sits in time.
    """
    x = s.grid
    d = s.values * np.exp(-1j * x * centre)
    psi_r, dr = _teager(d.real, x)
    psi_i, di = _teager(d.imag, x)
    psi_dr, _ = _teager(dr, x)
    psi_di, _ = _teager(di, x)
    num = psi_dr + psi_di
    den = psi_r + psi_i
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.sqrt(np.clip(num / den, 0.0, None))
    rate[:2] = np.nan
    rate[-2:] = np.nan
    return rate


def envelope_decay_exponent(omega, values, bins: int = 24) -> float:
    """Slope ``p`` of ``|values| ~ omega^-p`` fitted to log-binned maxima."""
    w = np.asarray(omega, dtype=float)
    mag = np.abs(np.asarray(values))
    edges = np.geomspace(w.min(), w.max(), bins + 1)
    xs, ys = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (w >= lo) & (w < hi) & (mag > 0)
        if sel.any():
            xs.append(math.sqrt(lo * hi))
            ys.append(mag[sel].max())
    if len(xs) < 3:
        raise ValueError("envelope_decay_exponent: too few populated bins")
    slope = np.polyfit(np.log(xs), np.log(ys), 1)[0]
    return float(-slope)
