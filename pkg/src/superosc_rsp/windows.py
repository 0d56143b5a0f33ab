"""Window functions: time profiles with compact support and their spectra.

A window is a complex profile ``eps(t)`` that vanishes outside ``support``;
its spectrum is ``int eps(t) exp(i w t) dt``.  Superoscillatory windows have
spectra that overflow doubles in their growth region, so every window also
offers ``spectrum_scaled(w) -> (values, log_scale)`` with
``spectrum = values * exp(log_scale)``.
"""
from __future__ import annotations

import math

import numpy as np

from . import transforms


class Window:
    t0: float = 1.0
    endpoint_singular = False
    smoothness = 0
    phase_rate = 0.0  # fastest oscillation of eps(t) itself, rad per unit t

    @property
    def support(self):
        return (-self.t0, 0.0)

    def __call__(self, t):
        raise NotImplementedError

    def spectrum_scaled(self, omega):
        vals = self.spectrum(omega)
        return vals, np.zeros(np.shape(vals))

    def spectrum(self, omega):
        vals, scale = self.spectrum_scaled(omega)
        if np.any(scale > 700.0):
            raise OverflowError(f"spectrum magnitude ~ exp({np.max(scale):.1f}) overflows")
        return vals * np.exp(scale)

    def log_peak(self):
        """log of sup |eps(t)| over the support (sampled estimate by default)."""
        lo, hi = self.support
        t = np.linspace(lo, hi, 4097)[1:-1]
        return float(np.log(np.max(np.abs(self(t)))))

    def blocks(self):
        """Closed-form superoscillatory building blocks contained in this window."""
        return []

    def __add__(self, other):
        return SumWindow([(1.0, self), (1.0, other)])

    def __rmul__(self, coef):
        return SumWindow([(coef, self)])


class SampledWindow(Window):
    """Piecewise-linear window through samples; spectrum by exact Filon sums."""

    def __init__(self, grid, values, t0=None):
        self.samples = transforms.SampledFunction(grid, values)
        self.t0 = float(t0) if t0 is not None else float(-self.samples.grid[0])

    @property
    def support(self):
        return (float(self.samples.grid[0]), float(self.samples.grid[-1]))

    def __call__(self, t):
        return self.samples(t)

    def spectrum(self, omega):
        return transforms.filon_linear(self.samples.grid, self.samples.values, omega)

    def spectrum_scaled(self, omega):
        vals = self.spectrum(omega)
        return vals, np.zeros(np.shape(vals))


class FunctionWindow(Window):
    """Window from a vectorized callable; spectrum by adaptive quadrature."""

    def __init__(self, func, t0, support=None, tol=1e-12):
        self.func = func
        self.t0 = float(t0)
        self._support = support if support is not None else (-self.t0, 0.0)
        self.tol = tol

    @property
    def support(self):
        return self._support

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self._support
        inside = (t >= lo) & (t <= hi)
        out = np.zeros(t.shape, dtype=complex)
        if inside.any():
            out[inside] = self.func(t[inside])
        return out

    def spectrum(self, omega):
        vals = transforms.fourier_values(self, np.atleast_1d(omega), tol=self.tol)
        return vals.reshape(np.shape(omega)) if np.ndim(omega) else vals[0]

    def spectrum_scaled(self, omega):
        vals = self.spectrum(omega)
        return vals, np.zeros(np.shape(vals))


class PulseWindow(Window):
    """Narrow smooth pulse centred at ``centre`` (stand-in for a time delta)."""

    def __init__(self, centre, kernel, t0):
        self.centre = float(centre)
        self.kernel = kernel
        self.t0 = float(t0)

    @property
    def support(self):
        half = 0.5 * self.kernel.width
        return (self.centre - half, self.centre + half)

    def __call__(self, t):
        return self.kernel(np.asarray(t, dtype=float) - self.centre - 0.5 * self.kernel.width) + 0j

    def spectrum_scaled(self, omega):
        w = np.asarray(omega, dtype=float)
        vals = self.kernel.spectrum(w) * np.exp(1j * w * (self.centre + 0.5 * self.kernel.width))
        return vals, np.zeros(w.shape)


def _combine_scaled(parts):
    """Sum ``(coef, values, log_scale)`` triples without overflow."""
    scale = np.max(np.stack([p[2] for p in parts]), axis=0)
    total = np.zeros(scale.shape, dtype=complex)
    for coef, vals, ls in parts:
        total = total + coef * vals * np.exp(ls - scale)
    return total, scale


class SumWindow(Window):
    """Linear combination ``sum_j c_j w_j`` of windows."""

    def __init__(self, terms):
        self.terms = [(complex(c), w) for c, w in terms]
        if not self.terms:
            raise ValueError("SumWindow needs at least one term")
        self.t0 = max(w.t0 for _, w in self.terms)
        self.endpoint_singular = any(w.endpoint_singular for _, w in self.terms)
        self.smoothness = min(w.smoothness for _, w in self.terms)
        self.phase_rate = max(w.phase_rate for _, w in self.terms)

    @property
    def support(self):
        los, his = zip(*(w.support for _, w in self.terms))
        return (min(los), max(his))

    def __call__(self, t):
        out = 0.0
        for c, w in self.terms:
            out = out + c * w(t)
        return out

    def spectrum_scaled(self, omega):
        w = np.asarray(omega, dtype=float)
        parts = []
        for c, win in self.terms:
            vals, ls = win.spectrum_scaled(w)
            parts.append((c, vals, np.broadcast_to(ls, np.shape(vals))))
        return _combine_scaled(parts)

    def log_peak(self):
        # a sum cannot exceed the sum of its parts; dominated by the largest
        peaks = [math.log(abs(c)) + w.log_peak() for c, w in self.terms if c != 0]
        top = max(peaks)
        return top + math.log(sum(math.exp(p - top) for p in peaks))

    def blocks(self):
        return [b for _, w in self.terms for b in w.blocks()]


class SmoothedWindow(Window):
    """Window convolved with a compact kernel; spectrum multiplies by the kernel's."""

    def __init__(self, base, kernel):
        self.base = base
        self.kernel = kernel
        self.t0 = base.t0
        self.smoothness = base.smoothness + max(kernel.order - 1, 0)
        self.phase_rate = base.phase_rate

    @property
    def support(self):
        lo, hi = self.base.support
        return (lo - self.kernel.width, hi)

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(t.shape, dtype=complex)
        tau = self.kernel.width
        lo, hi = self.support
        for i, ti in enumerate(t):
            if ti < lo or ti > hi:
                out[i] = 0.0
                continue
            # (eps * h)(t) = int_{-tau}^{0} h(s) eps(t - s) ds
            res = transforms.integrate(lambda s: self.kernel(s) * self.base(ti - s),
                                       -tau, 0.0, tol=1e-11 * max(1.0, abs(self.kernel.norm)))
            out[i] = res.value
        return out

    def spectrum_scaled(self, omega):
        w = np.asarray(omega, dtype=float)
        vals, ls = self.base.spectrum_scaled(w)
        return vals * self.kernel.spectrum(w), ls

    def log_peak(self):
        return self.base.log_peak()

    def blocks(self):
        return self.base.blocks()


def box_window(t0=1.0, n=4097):
    t = np.linspace(-t0, 0.0, n)
    return SampledWindow(t, np.ones_like(t), t0=t0)
