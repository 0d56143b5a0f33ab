"""Superoscillatory window functions with compact support ``[-t0, 0]``.

The building block is the alpha-integral

    eps(w) = D / (2 d sqrt(2 pi)) int_0^{2pi} exp(i w t0 (cos a - 1)/2) exp(i cos(a - iA) / d^2) da

which evaluates to ``D sqrt(pi) / (sqrt(2) d) exp(-i w t0 / 2) J0(sqrt(rho(w)) / d^2)`` with
``rho(w) = 1 + d^2 w t0 cosh A + d^4 w^2 t0^2 / 4``.  ``w`` here is the
frequency offset above the mass gap; for ``rho < 0`` the Bessel argument is
imaginary and the function grows exponentially.

Phase-fixed pairs (``1/d^2 = 2 pi m +- pi/4``) combine into the complex
variants ``~ D exp(i w t')`` with ``t' = t0 (+-cosh A - 1) / 2`` outside the
support, and weighted sums of variants synthesize a prescribed spectrum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import specfun, transforms
from ._accel import USE_NUMBA, njit
from .specfun import _j0e_scalar
from .transforms import SampledFunction
from .windows import PulseWindow, SampledWindow, SumWindow, Window

BRANCH_OFFSET = {"plus": math.pi / 4.0, "minus": -math.pi / 4.0}
VARIANT_KINDS = ("cos", "sin", "complex_plus", "complex_minus")
DOMAIN_BOUND = 0.1
ENDPOINT_GUARD = 1e-9


class DomainTooLargeError(ValueError):
    """delta too large for the requested superoscillatory domain."""


class EndpointSingularityError(ValueError):
    pass


class TruncationError(ValueError):
    pass


@dataclass(frozen=True)
class SuperoscParams:
    delta: float
    A: float
    t0: float = 1.0
    amplitude: float = 1.0
    phase_branch: Optional[str] = None

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.A < 0:
            raise ValueError("A must be non-negative")
        if not self.t0 > 0 or not self.amplitude > 0:
            raise ValueError("t0 and amplitude must be positive")
        if self.phase_branch not in (None, "plus", "minus"):
            raise ValueError(f"unknown phase branch {self.phase_branch!r}")

    @classmethod
    def quantized(cls, delta, A, t0=1.0, amplitude=1.0, branch="plus"):
        """Round ``1/delta^2`` to the nearest ``2 pi m +- pi/4`` with ``m >= 1``."""
        off = BRANCH_OFFSET[branch]
        m = max(1, int(round((delta ** -2 - off) / (2.0 * math.pi))))
        return cls.from_order(m, A, t0, amplitude, branch)

    @classmethod
    def from_order(cls, m, A, t0=1.0, amplitude=1.0, branch="plus"):
        inv = 2.0 * math.pi * m + BRANCH_OFFSET[branch]
        return cls(inv ** -0.5, A, t0, amplitude, branch)

    @property
    def order(self):
        return int(round((self.delta ** -2 - BRANCH_OFFSET.get(self.phase_branch, 0.0)) / (2 * math.pi)))

    @property
    def growth_onset(self):
        """Estimate ``-2 exp(-A) / (t0 delta^2)`` of where exponential growth sets in."""
        return -2.0 * math.exp(-self.A) / (self.t0 * self.delta ** 2)

    @property
    def radicand_zero(self):
        """Exact frequency where the Bessel argument turns imaginary."""
        d2, c = self.delta ** 2, math.cosh(self.A)
        # smaller-magnitude root of 1 + d2 c t0 w + d2^2 t0^2 w^2 / 4
        disc = c * c - 1.0
        return -(2.0 / (d2 * self.t0)) * (c - math.sqrt(disc))

    def omega_c_bound(self):
        """Largest domain end with ``delta^2 cosh(A) t0 w_c <= 0.1``."""
        return DOMAIN_BOUND / (self.delta ** 2 * math.cosh(self.A) * self.t0)

    def variant_time(self, sign=+1):
        return 0.5 * self.t0 * (sign * math.cosh(self.A) - 1.0)


# --------------------------------------------------------------------------
# closed form (Bessel) evaluation, with a numba kernel for the hot loop
# --------------------------------------------------------------------------

@njit
def _block_scaled_scalar(w, delta, A, t0, amp):
    d2 = delta * delta
    rho = 1.0 + d2 * w * t0 * math.cosh(A) + d2 * d2 * w * w * t0 * t0 / 4.0
    if rho >= 0.0:
        z = complex(math.sqrt(rho) / d2, 0.0)
    else:
        z = complex(0.0, math.sqrt(-rho) / d2)
    pref = amp * math.sqrt(math.pi) / (math.sqrt(2.0) * delta)
    val = pref * np.exp(-0.5j * w * t0) * _j0e_scalar(z)
    return val, abs(z.imag)


@njit
def _block_scaled_loop(w, delta, A, t0, amp):
    vals = np.empty(w.size, dtype=np.complex128)
    scales = np.empty(w.size, dtype=np.float64)
    for i in range(w.size):
        v, s = _block_scaled_scalar(w[i], delta, A, t0, amp)
        vals[i] = v
        scales[i] = s
    return vals, scales


def _block_scaled_numpy(w, delta, A, t0, amp):
    d2 = delta * delta
    rho = 1.0 + d2 * w * t0 * math.cosh(A) + d2 * d2 * w * w * t0 * t0 / 4.0
    z = np.sqrt(rho.astype(complex)) / d2
    pref = amp * math.sqrt(math.pi) / (math.sqrt(2.0) * delta)
    return pref * np.exp(-0.5j * w * t0) * specfun.bessel_j0e(z), np.abs(z.imag)


def eval_spectral_closed_scaled(p: SuperoscParams, omega_p):
    """Closed form scaled by ``exp(-|Im z|)``; returns ``(values, log_scale)``."""
    w = np.atleast_1d(np.asarray(omega_p, dtype=float))
    fn = _block_scaled_loop if USE_NUMBA else _block_scaled_numpy
    vals, scales = fn(w, p.delta, p.A, p.t0, p.amplitude)
    if np.ndim(omega_p) == 0:
        return complex(vals[0]), float(scales[0])
    return vals, scales


class SignedOverflowError(OverflowError):
    def __init__(self, log_magnitude):
        super().__init__(f"|eps(w)| ~ exp({log_magnitude:.2f}) overflows")
        self.log_magnitude = log_magnitude


def eval_spectral_closed(p: SuperoscParams, omega_p):
    """Closed-form spectrum ``D sqrt(pi)/(sqrt 2 d) e^{-i w t0/2} J0(sqrt(rho)/d^2)``."""
    vals, scales = eval_spectral_closed_scaled(p, omega_p)
    if np.any(np.asarray(scales) > 700.0):
        raise SignedOverflowError(float(np.max(scales) + np.log(np.max(np.abs(vals)))))
    return vals * np.exp(scales)


def _contour_shift(p: SuperoscParams, w):
    """Imaginary contour offset that turns the integrand into ``exp(i R cos beta)``."""
    a = 0.5 * w * p.t0
    b = p.delta ** -2
    lo = abs(a + b * math.exp(-p.A))
    hi = abs(a + b * math.exp(p.A))
    if lo == 0.0:
        raise transforms.QuadratureError("alpha-integral: contour shift undefined at the radicand zero")
    return 0.5 * (math.log(hi) - math.log(lo))


def eval_spectral_integral_scaled(p: SuperoscParams, omega_p: float, tol=None):
    """Adaptive quadrature of the alpha-integral, scaled like the closed form.

    The integrand is entire and 2 pi periodic, so the contour is moved to
    ``Im alpha = s`` where the exponentially large parts of the two factors
    cancel analytically instead of numerically.  Returns ``(value, log_scale)``.
    """
    if p.delta < 1e-3:
        raise ValueError("eval_spectral_integral: delta below the 1e-3 quadrature guard")
    w = float(omega_p)
    a = 0.5 * w * p.t0
    b = p.delta ** -2
    s = _contour_shift(p, w)
    rho = 1.0 + p.delta ** 2 * w * p.t0 * math.cosh(p.A) + p.delta ** 4 * w * w * p.t0 ** 2 / 4.0
    big_r = b * math.sqrt(abs(rho))
    log_scale = big_r if rho < 0 else 0.0
    pref = p.amplitude / (2.0 * p.delta * math.sqrt(2.0 * math.pi))
    if tol is None:
        tol = 1e-10 * p.amplitude / p.delta

    def integrand(beta):
        alpha = beta + 1j * s
        expo = 1j * a * (np.cos(alpha) - 1.0) + 1j * b * np.cos(alpha - 1j * p.A)
        return np.exp(expo - log_scale)

    res = transforms.integrate(integrand, 0.0, 2.0 * math.pi, tol=tol / pref,
                               phase_rate=big_r + 1.0)
    return pref * res.value, log_scale


def eval_spectral_integral(p: SuperoscParams, omega_p: float, tol=None):
    val, scale = eval_spectral_integral_scaled(p, omega_p, tol)
    if scale > 700.0:
        raise SignedOverflowError(scale + math.log(abs(val)))
    return val * math.exp(scale)


# --------------------------------------------------------------------------
# time domain
# --------------------------------------------------------------------------

def _time_scaled(p: SuperoscParams, t):
    """Time profile scaled by ``exp(-sinh(A)/delta^2)``; zero outside the support."""
    t = np.asarray(t, dtype=float)
    u = (2.0 * t + p.t0) / p.t0
    inside = np.abs(u) < 1.0
    us = np.where(inside, u, 0.0)
    root = np.sqrt(1.0 - us * us)
    k = math.sinh(p.A) / p.delta ** 2
    phase = np.exp(1j * us * math.cosh(p.A) / p.delta ** 2)
    pref = p.amplitude / (p.delta * math.sqrt(2.0 * math.pi) * p.t0 * root)
    val = pref * phase * (np.exp(-(root + 1.0) * k) + np.exp((root - 1.0) * k))
    return np.where(inside, val, 0.0), k


def eval_time_domain(p: SuperoscParams, t):
    """Two-branch closed form of the window in time; exactly zero off ``[-t0, 0]``."""
    t_arr = np.asarray(t, dtype=float)
    near = (np.abs(t_arr) < ENDPOINT_GUARD * p.t0) | (np.abs(t_arr + p.t0) < ENDPOINT_GUARD * p.t0)
    if np.any(near):
        raise EndpointSingularityError("eval_time_domain: t within 1e-9 t0 of an endpoint")
    val, k = _time_scaled(p, t_arr)
    if k > 700.0:
        raise SignedOverflowError(k + math.log(p.amplitude / (p.delta * math.sqrt(2 * math.pi) * p.t0)))
    out = val * math.exp(k)
    return complex(out) if np.ndim(t) == 0 else out


def log_peak(p: SuperoscParams):
    """log |eps(-t0/2)|, the window maximum once endpoint singularities are smoothed."""
    k = math.sinh(p.A) / p.delta ** 2
    return math.log(p.amplitude / (p.delta * math.sqrt(2.0 * math.pi) * p.t0)) + k + math.log1p(math.exp(-2 * k))


class BlockWindow(Window):
    """One closed-form superoscillatory block."""

    endpoint_singular = True

    def __init__(self, params: SuperoscParams):
        self.params = params
        self.t0 = params.t0
        self.phase_rate = 2.0 * math.cosh(params.A) / (params.delta ** 2 * params.t0)

    def __call__(self, t):
        val, k = _time_scaled(self.params, t)
        if k > 700.0:
            top = float(np.max(np.abs(val))) if np.size(val) else 0.0
            if top == 0.0:
                return val
            raise SignedOverflowError(k + math.log(top))
        return val * math.exp(k)

    def spectrum_scaled(self, omega):
        return eval_spectral_closed_scaled(self.params, omega)

    def log_peak(self):
        return log_peak(self.params)

    def blocks(self):
        return [self.params]


# --------------------------------------------------------------------------
# phase-fixed variants
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralFunction:
    omega_c: float
    samples: SampledFunction
    window: Optional[Window] = field(default=None, compare=False)


def order_for_domain(A, t0, omega_c):
    """Smallest ``m`` for which both phase branches satisfy the domain bound."""
    inv_needed = math.cosh(A) * t0 * omega_c / DOMAIN_BOUND
    return max(1, int(math.ceil((inv_needed + math.pi / 4.0) / (2.0 * math.pi))))


def variant_pair(p: SuperoscParams):
    """(plus-branch, minus-branch) parameters sharing the order of ``p``."""
    m = max(1, int(round(p.delta ** -2 / (2.0 * math.pi))))
    plus = SuperoscParams.from_order(m, p.A, p.t0, p.amplitude, "plus")
    minus = SuperoscParams.from_order(m, p.A, p.t0, p.amplitude, "minus")
    return plus, minus


def variant_window(p: SuperoscParams, kind: str) -> Window:
    if kind not in VARIANT_KINDS:
        raise ValueError(f"unknown variant kind {kind!r}")
    plus, minus = variant_pair(p)
    if kind == "cos":
        return SumWindow([(1.0, BlockWindow(plus))])
    if kind == "sin":
        return SumWindow([(1.0, BlockWindow(minus))])
    sign = 1.0 if kind == "complex_plus" else -1.0
    return SumWindow([(1.0, BlockWindow(plus)), (sign * 1j, BlockWindow(minus))])


def make_variant(p: SuperoscParams, kind: str, omega_c: float, n: int = 4096) -> SpectralFunction:
    """Sample a phase-fixed variant on ``[-w_pad, 10 w_c]``.

    Raises :class:`DomainTooLargeError` when ``delta^2 cosh(A) t0 w_c > 0.1``.
    """
    plus, minus = variant_pair(p)
    worst = max(plus.delta, minus.delta) if kind != "cos" else plus.delta
    if kind == "sin":
        worst = minus.delta
    if worst ** 2 * math.cosh(p.A) * p.t0 * omega_c > DOMAIN_BOUND * (1 + 1e-12):
        raise DomainTooLargeError(
            f"delta^2 cosh(A) t0 w_c = {worst ** 2 * math.cosh(p.A) * p.t0 * omega_c:.3g} > {DOMAIN_BOUND}")
    win = variant_window(p, kind)
    pad = 4.0 * math.exp(-p.A) / (p.t0 * plus.delta ** 2)
    grid = np.linspace(-pad, 10.0 * omega_c, n)
    vals, scale = win.spectrum_scaled(grid)
    # growth region may overflow; keep it representable by clipping the log scale
    vals = vals * np.exp(np.minimum(scale, 700.0))
    return SpectralFunction(omega_c, SampledFunction(grid, vals), win)


# --------------------------------------------------------------------------
# synthesis
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeProfile:
    """Desired time profile ``eps_des(t')``: a density plus point masses.

    ``spectrum`` optionally gives the exact target transform for error reports.
    """
    density: Optional[Callable] = None
    atoms: Sequence = ()
    support: tuple = (0.0, 0.0)
    spectrum: Optional[Callable] = None

    def __add__(self, other):
        dens = [d for d in (self.density, other.density) if d is not None]
        lo = min(self.support[0], other.support[0])
        hi = max(self.support[1], other.support[1])
        spec = None
        if self.spectrum is not None and other.spectrum is not None:
            spec = lambda w, a=self.spectrum, b=other.spectrum: a(w) + b(w)
        density = None
        if dens:
            density = lambda t, ds=tuple(dens): sum(d(t) for d in ds)
        return TimeProfile(density, tuple(self.atoms) + tuple(other.atoms), (lo, hi), spec)

    def target_spectrum(self, omega):
        if self.spectrum is not None:
            return self.spectrum(np.asarray(omega, dtype=float))
        w = np.asarray(omega, dtype=float)
        out = np.zeros(w.shape, dtype=complex)
        for t, c in self.atoms:
            out = out + c * np.exp(1j * w * t)
        if self.density is not None:
            lo, hi = self.support
            grid = np.linspace(lo, hi, 8193)
            out = out + transforms.filon_linear(grid, self.density(grid), w)
        return out


@njit
def _variant_sum_loop(w, a_nodes, coef_p, coef_m, delta_p, delta_m, t0, amp):
    vals = np.empty(w.size, dtype=np.complex128)
    scales = np.empty(w.size, dtype=np.float64)
    for i in range(w.size):
        acc = 0.0 + 0.0j
        big = 0.0
        for j in range(a_nodes.size):
            for which in range(2):
                if which == 0:
                    c = coef_p[j]
                    d = delta_p
                else:
                    c = coef_m[j]
                    d = delta_m
                if c == 0:
                    continue
                v, s = _block_scaled_scalar(w[i], d, a_nodes[j], t0, amp)
                if s > big:
                    acc = acc * math.exp(big - s) + c * v
                    big = s
                else:
                    acc += c * v * math.exp(s - big)
        vals[i] = acc
        scales[i] = big
    return vals, scales


def _variant_sum_numpy(w, a_nodes, coef_p, coef_m, delta_p, delta_m, t0, amp):
    parts = []
    for j, a in enumerate(a_nodes):
        for c, d in ((coef_p[j], delta_p), (coef_m[j], delta_m)):
            if c != 0:
                v, s = _block_scaled_numpy(w, d, a, t0, amp)
                parts.append((c, v, s))
    from .windows import _combine_scaled

    return _combine_scaled(parts)


class SynthesizedWindow(Window):
    """Weighted sum of complex variants plus ordinary (in-support) pieces."""

    def __init__(self, a_nodes, coef_plus, coef_minus, plus: SuperoscParams,
                 minus: SuperoscParams, extras=()):
        self.a_nodes = np.asarray(a_nodes, dtype=float)
        self.coef_plus = np.asarray(coef_plus, dtype=complex)
        self.coef_minus = np.asarray(coef_minus, dtype=complex)
        self.plus = plus
        self.minus = minus
        self.extras = list(extras)
        self.t0 = plus.t0
        self.endpoint_singular = True

    def __call__(self, t):
        out = np.zeros(np.shape(t), dtype=complex)
        for a, cp, cm in zip(self.a_nodes, self.coef_plus, self.coef_minus):
            if cp != 0:
                out = out + cp * BlockWindow(replace(self.plus, A=a))(t)
            if cm != 0:
                out = out + cm * BlockWindow(replace(self.minus, A=a))(t)
        for c, win in self.extras:
            out = out + c * win(t)
        return out

    def spectrum_scaled(self, omega):
        w = np.atleast_1d(np.asarray(omega, dtype=float))
        fn = _variant_sum_loop if USE_NUMBA else _variant_sum_numpy
        vals, scales = fn(w, self.a_nodes, self.coef_plus, self.coef_minus,
                          self.plus.delta, self.minus.delta, self.t0, self.plus.amplitude)
        if self.extras:
            from .windows import _combine_scaled

            parts = [(1.0, vals, scales)]
            for c, win in self.extras:
                v, s = win.spectrum_scaled(w)
                parts.append((c, v, np.broadcast_to(s, v.shape)))
            vals, scales = _combine_scaled(parts)
        if np.ndim(omega) == 0:
            return complex(vals[0]), float(scales[0])
        return vals, scales

    def log_peak(self):
        logs = []
        for a, cp, cm in zip(self.a_nodes, self.coef_plus, self.coef_minus):
            for c, base in ((cp, self.plus), (cm, self.minus)):
                if c != 0:
                    logs.append(math.log(abs(c)) + log_peak(replace(base, A=a)))
        for c, win in self.extras:
            if c != 0:
                logs.append(math.log(abs(c)) + win.log_peak())
        top = max(logs)
        return top + math.log(sum(math.exp(x - top) for x in logs))

    def blocks(self):
        a_max = float(self.a_nodes.max()) if self.a_nodes.size else 0.0
        return [replace(self.plus, A=a_max), replace(self.minus, A=a_max)]


@dataclass
class SynthesisResult:
    window: SynthesizedWindow
    deviation: float
    relative_deviation: float
    delta: float
    A_max: float
    T: float
    truncated: bool
    n_terms: int


def default_synthesis_order(A_max, t0, omega_c, phase_tol=0.01):
    """Order ``m`` keeping the quadratic phase error of every variant below ``phase_tol``.

    The next term of the square-root expansion shifts the variant phase by
    ``delta^2 (w t0 cosh A)^2 / 8``; the domain bound alone allows ~1 rad at
    large ``A``, which is far too coarse for synthesis.
    """
    ct = omega_c * t0 * math.cosh(A_max)
    inv = max(ct / DOMAIN_BOUND, ct * ct / (8.0 * phase_tol))
    return max(1, int(math.ceil((inv + math.pi / 4.0) / (2.0 * math.pi))))


def _gauss_nodes(a_max, n):
    """Gauss-Legendre nodes and weights on ``[0, a_max]``."""
    if n < 1 or a_max <= 0:
        return np.zeros(0), np.zeros(0)
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * a_max * (x + 1.0), 0.5 * a_max * w


def synthesize_window(target: TimeProfile, omega_c: float, n_terms: int = 256,
                      t0: float = 1.0, A_max: Optional[float] = None,
                      delta: Optional[float] = None, amplitude: float = 1.0,
                      strict: bool = False, n_check: int = 2048,
                      phase_tol: float = 0.01) -> SynthesisResult:
    """Assemble a window whose spectrum tracks ``target`` on ``[0, w_c]``.

    Nodes ``t' >= 0`` use ``complex_plus`` variants and ``t' <= -t0`` use
    ``complex_minus`` variants, both placed at Gauss-Legendre nodes in ``A`` (the
    measure is ``t0 sinh(A) / 2 dA``); the part of the target inside
    ``(-t0, 0)`` needs no superoscillation and enters as an ordinary sampled
    window.  Point masses map to single variants.
    """
    lo, hi = target.support
    if A_max is None:
        reach = max(hi, -lo - t0, 0.0)
        A_max = math.acosh(2.0 * reach / t0 + 1.0) if reach > 0 else 0.0
    T = 0.5 * t0 * (math.cosh(A_max) + 1.0)
    truncated = hi > 0.5 * t0 * (math.cosh(A_max) - 1.0) * (1 + 1e-12) or lo < -T * (1 + 1e-12)
    if truncated and strict:
        raise TruncationError(f"target support {target.support} exceeds the reach T = {T:.4g}")
    if delta is None:
        m = default_synthesis_order(A_max, t0, omega_c, phase_tol)
    else:
        m = max(1, int(round(delta ** -2 / (2.0 * math.pi))))
    plus = SuperoscParams.from_order(m, 0.0, t0, amplitude, "plus")
    minus = SuperoscParams.from_order(m, 0.0, t0, amplitude, "minus")

    plus_hi = min(hi, 0.5 * t0 * (math.cosh(A_max) - 1.0))
    minus_lo = max(lo, -T)
    len_plus = max(plus_hi, 0.0)
    len_minus = max(-t0 - minus_lo, 0.0)
    total = len_plus + len_minus
    n_plus = int(round(n_terms * len_plus / total)) if total > 0 else 0
    n_minus = n_terms - n_plus if total > 0 else 0

    a_nodes, c_p, c_m = [], [], []
    if target.density is not None and n_plus >= 1:
        a, wts = _gauss_nodes(math.acosh(2.0 * plus_hi / t0 + 1.0), n_plus)
        tp = 0.5 * t0 * (np.cosh(a) - 1.0)
        c = wts * 0.5 * t0 * np.sinh(a) * target.density(tp) / amplitude
        a_nodes.append(a)
        c_p.append(c)
        c_m.append(1j * c)
    if target.density is not None and n_minus >= 1:
        a, wts = _gauss_nodes(math.acosh(-2.0 * minus_lo / t0 - 1.0), n_minus)
        tm = -0.5 * t0 * (np.cosh(a) + 1.0)
        c = wts * 0.5 * t0 * np.sinh(a) * target.density(tm) / amplitude
        a_nodes.append(a)
        c_p.append(c)
        c_m.append(-1j * c)
    extras = []
    kernel = transforms.SmoothingKernel(t0 / 200.0, 4)
    for t_atom, weight in target.atoms:
        if t_atom >= 0.0:
            a = math.acosh(2.0 * t_atom / t0 + 1.0)
            a_nodes.append(np.array([a]))
            c_p.append(np.array([weight / amplitude]))
            c_m.append(np.array([1j * weight / amplitude]))
        elif t_atom <= -t0:
            a = math.acosh(-2.0 * t_atom / t0 - 1.0)
            a_nodes.append(np.array([a]))
            c_p.append(np.array([weight / amplitude]))
            c_m.append(np.array([-1j * weight / amplitude]))
        else:
            extras.append((weight, PulseWindow(t_atom, kernel, t0)))
    reg_lo, reg_hi = max(lo, -t0), min(hi, 0.0)
    if target.density is not None and reg_hi > reg_lo:
        grid = np.linspace(reg_lo, reg_hi, 1025)
        extras.append((1.0, SampledWindow(grid, target.density(grid), t0=t0)))

    cat = (lambda xs: np.concatenate(xs) if xs else np.zeros(0))
    window = SynthesizedWindow(cat(a_nodes), cat(c_p).astype(complex), cat(c_m).astype(complex),
                               plus, minus, extras)
    check = np.linspace(0.0, omega_c, n_check)
    got = window.spectrum(check)
    want = target.target_spectrum(check)
    dev = float(np.max(np.abs(got - want)))
    rel = dev / float(np.max(np.abs(want))) if np.any(want != 0) else dev
    a_used = float(window.a_nodes.max()) if window.a_nodes.size else 0.0
    return SynthesisResult(window, dev, rel, plus.delta, max(A_max, a_used), T, truncated, n_terms)


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------

@dataclass
class SuperoscReport:
    omega_c: float
    growth_onset: float
    growth_onset_estimate: float
    domain_median: float
    max_local_frequency: float
    band_limit: float
    superoscillatory: bool
    tail_exponent: float
    tail_range: tuple
    curve_omega: np.ndarray = field(repr=False)
    curve_log_abs: np.ndarray = field(repr=False)
    curve_rate: np.ndarray = field(repr=False)


def _log_abs(window, w):
    vals, scale = window.spectrum_scaled(w)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(vals)) + scale


def _patch_stats(window, centre_w, h, centre_t, n=41):
    grid = centre_w + h * (np.arange(n) - n // 2)
    vals, scale = window.spectrum_scaled(grid)
    vals = vals * np.exp(scale - scale.max())
    s = SampledFunction(grid, vals)
    rate = transforms.oscillation_rate(s, centre_t)
    d = vals * np.exp(-1j * grid * centre_t)
    psi = 0.0
    psi_d = 0.0
    for part in (d.real, d.imag):
        p0, du = transforms._teager(part, grid)
        p1, _ = transforms._teager(du, grid)
        psi = psi + p0
        psi_d = psi_d + p1
    with np.errstate(divide="ignore", invalid="ignore"):
        amp = psi / np.sqrt(psi_d)
    core = slice(4, n - 4)
    return float(np.nanmedian(rate[core])), float(np.nanmedian(amp[core])) * math.exp(scale.max())


def superoscillation_report(window: Window, omega_c: float, n: int = 4096,
                            onset_factor: float = 10.0, tolerance: float = 0.01) -> SuperoscReport:
    """Characterize growth, superoscillation and tail decay of a window spectrum.

    * growth onset: scanning down from ``w = 0``, the first frequency where
      ``|eps|`` exceeds ``onset_factor`` times its median on ``[0, w_c]``;
    * local frequency: energy-operator oscillation rate about the support
      centre, converted to the farthest time offset of the local content;
      superoscillatory when that offset exceeds the band limit ``t0`` by more
      than ``tolerance``;
    * tail exponent: envelope power law fitted over one decade starting at
      ``max(10 w_c, 100 cosh(A) / (t0 delta^2))``, beyond which the blocks
      oscillate regularly.
    """
    blocks = window.blocks()
    lo, hi = window.support
    t0 = window.t0
    centre = 0.5 * (lo + hi)
    band = max(abs(lo), abs(hi))
    if blocks:
        a_max = max(b.A for b in blocks)
        d_min = min(b.delta for b in blocks)
        onset_est = min(b.growth_onset for b in blocks)
        regular = 100.0 * math.cosh(a_max) / (t0 * d_min ** 2)
    else:
        onset_est = float("nan")
        regular = 0.0
    pad = 2.0 * abs(onset_est) if np.isfinite(onset_est) else 10.0 / t0

    w_dom = np.linspace(0.0, omega_c, n)
    log_dom = _log_abs(window, w_dom)
    median = float(np.median(log_dom))
    w_neg = np.linspace(-pad, 0.0, n)
    log_neg = _log_abs(window, w_neg)
    above = np.nonzero(log_neg[::-1] > median + math.log(onset_factor))[0]
    onset = float(w_neg[::-1][above[0]]) if above.size else float("nan")

    s_dom = SampledFunction(w_dom, *[v * np.exp(s - s.max()) for v, s in [window.spectrum_scaled(w_dom)]])
    rate = transforms.oscillation_rate(s_dom, centre)
    half = 0.5 * (hi - lo)
    reach = np.abs(centre) + rate
    # the energy operator spikes near isolated zeros; a high quantile is robust
    max_lf = float(np.nanpercentile(reach, 90)) if np.isfinite(reach).any() else float("nan")
    # coarse grids cannot resolve fast oscillation; refine locally when needed
    if not np.isfinite(max_lf) or (max_lf - abs(centre)) * (w_dom[1] - w_dom[0]) > 0.2:
        h = 0.02 / max(max_lf, 1.0 / t0)
        probes = np.linspace(0.1, 0.9, 5) * omega_c
        max_lf = max(abs(centre) + _patch_stats(window, wc, h, centre)[0] for wc in probes)
    superosc = max_lf > band * (1.0 + tolerance) and max_lf - abs(centre) > half * (1.0 + tolerance)

    # past the superoscillatory regime the content is bounded by the support,
    # so a step resolving rate ``half`` suffices
    start = max(10.0 * omega_c, regular)
    tail_w = np.geomspace(start, 10.0 * start, 12)
    h_tail = 0.1 / max(half, 1e-12)
    amps = np.array([_patch_stats(window, wc, h_tail, centre)[1] for wc in tail_w])
    good = np.isfinite(amps) & (amps > 0)
    slope = np.polyfit(np.log(tail_w[good]), np.log(amps[good]), 1)[0] if good.sum() >= 3 else float("nan")

    curve_w = np.concatenate([w_neg[:-1], w_dom])
    curve_log = np.concatenate([log_neg[:-1], log_dom])
    curve_rate = np.concatenate([np.full(n - 1, np.nan), reach])
    return SuperoscReport(omega_c, onset, onset_est, float(math.exp(median)), max_lf, band,
                          bool(superosc), float(-slope), (float(tail_w[0]), float(tail_w[-1])),
                          curve_w, curve_log, curve_rate)
