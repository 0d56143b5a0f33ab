"""Free scalar field in the vacuum and first-order spin-field amplitudes.

Conventions, fixed once:

* units c = hbar = 1; ``omega(k) = sqrt(m^2 + k^2)``;
* windows are functions of the offset ``w' = omega(k) + gap - m``, so a
  window spectrum ``eps(w')`` enters at ``w' = omega(k) + gap - m``;
* momentum integrals carry ``d^dk / (2 pi)^d``;
* the spin amplitude uses ``1/omega`` per mode, field states ``1/sqrt(2 omega)``;
* only normalized states and log-ratios are meaningful.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import specfun, superosc, transforms
from .transforms import SampledFunction
from .windows import SampledWindow, SumWindow, Window

K_POINTS = 2 ** 14
K_FACTOR = 10.0
NOISE_POINTS = 33


class TailTruncationWarning(UserWarning):
    pass


class ZeroNormError(ValueError):
    pass


class GridMismatchError(ValueError):
    pass


class OverlapError(ValueError):
    pass


@dataclass(frozen=True)
class FieldConfig:
    mass: float = 1.0
    gap: float = 0.0
    dim: int = 1
    coupling: float = 1e-3

    def __post_init__(self):
        if self.mass < 0 or self.gap < 0:
            raise ValueError("mass and gap must be non-negative")
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")
        if self.dim == 1 and not self.mass > 0:
            raise ValueError("a massless field is infrared divergent in d = 1; need mass > 0")
        if not self.coupling > 0:
            raise ValueError("coupling must be positive")

    def omega_prime(self, k):
        return dispersion(k, self) + self.gap - self.mass

    def k_of(self, omega_p):
        """Momentum whose offset frequency is ``omega_p`` (0 below threshold)."""
        w = np.asarray(omega_p, dtype=float) + self.mass - self.gap
        return np.sqrt(np.clip(w * w - self.mass ** 2, 0.0, None))


def dispersion(k, cfg: FieldConfig):
    k = np.asarray(k, dtype=float)
    m = cfg.mass
    # hypot keeps the relativistic limit exact
    out = np.hypot(m, k)
    return float(out) if out.ndim == 0 else out


def propagator(separation, cfg: FieldConfig, time_sep: float = 0.0):
    """Equal-time Wightman function ``int dk e^{ikx} / (2 pi 2 omega) = K0(m|x|) / (2 pi)``."""
    if cfg.dim != 1:
        raise ValueError("propagator: only d = 1 is implemented")
    if time_sep != 0.0:
        raise NotImplementedError("propagator: only equal times are supported")
    x = np.abs(np.asarray(separation, dtype=float))
    if np.any(x == 0):
        raise ValueError("propagator: logarithmic divergence at zero separation")
    out = specfun.bessel_k0(cfg.mass * x) / (2.0 * math.pi)
    return float(out) if np.ndim(out) == 0 else out


def k_grid(cfg: FieldConfig, omega_c: float, n: int = K_POINTS, factor: float = K_FACTOR):
    """Non-negative momenta up to ``factor * k(omega_c)``."""
    k_max = factor * float(cfg.k_of(omega_c))
    if not k_max > 0:
        raise ValueError("k_grid: omega_c must exceed the threshold")
    return np.linspace(0.0, k_max, n)


def _window_on_k(window, k, cfg):
    vals, scale = window.spectrum_scaled(cfg.omega_prime(k))
    if np.any(np.asarray(scale) > 700.0):
        raise OverflowError("window spectrum overflows on the momentum grid")
    return vals * np.exp(scale)


def _cos_transform(k, f, x):
    """``int_0^{kmax} f(k) cos(k x) dk`` for piecewise-linear ``f``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    plus = transforms.filon_linear(k, f, x)
    minus = transforms.filon_linear(k, f, -x)
    return 0.5 * (plus + minus)


def amplitude_up(L_probe, window, cfg: FieldConfig, omega_c: Optional[float] = None,
                 k_max: Optional[float] = None, n: int = K_POINTS, spectrum=None):
    """First-order amplitude for a spin at distance ``L'`` to flip up.

    ``A(L') = int dk/(2 pi) eps(omega(k) + gap - m) e^{i k L'} / omega(k)``,
    folded onto ``k >= 0``.  ``window`` may be ``None`` when ``spectrum`` (a
    callable of ``w'``) is given.
    """
    if cfg.dim != 1:
        raise ValueError("amplitude_up: only d = 1 is implemented")
    if k_max is None:
        if omega_c is None:
            raise ValueError("amplitude_up: give omega_c or k_max")
        k = k_grid(cfg, omega_c, n)
    else:
        k = np.linspace(0.0, k_max, n)
    om = dispersion(k, cfg)
    eps = spectrum(cfg.omega_prime(k)) if spectrum is not None else _window_on_k(window, k, cfg)
    f = eps / om
    out = _cos_transform(k, f, L_probe) / math.pi
    # envelope of the discarded tail, assuming at worst w'^{-1/2} decay
    edge = np.max(np.abs(f[-max(2, n // 20):]))
    tail = 2.0 * edge * k[-1]
    scale = np.max(np.abs(out)) if np.any(out != 0) else 0.0
    if scale > 0 and tail / math.pi > 1e-6 * scale:
        warnings.warn(f"amplitude_up: tail beyond k_max may contribute ~{tail / math.pi / scale:.1e} relative",
                      TailTruncationWarning, stacklevel=2)
    return complex(out[0]) if np.ndim(L_probe) == 0 else out


def amplitude_up_nested(L_probe, window, cfg: FieldConfig, k_max: float, n: int = 2049,
                        tol: float = 1e-12):
    """Same amplitude with the time integral done by quadrature at every momentum."""
    k = np.linspace(0.0, k_max, n)
    om = dispersion(k, cfg)
    eps = transforms.fourier_time_to_freq(window, cfg.omega_prime(k), tol=tol).values
    out = _cos_transform(k, eps / om, L_probe) / math.pi
    return complex(out[0]) if np.ndim(L_probe) == 0 else out


# --------------------------------------------------------------------------
# mirror pair
# --------------------------------------------------------------------------

def desired_spectrum_mirror_pair(L: float, cfg: FieldConfig) -> Callable:
    """``w' -> cos(k L)`` with ``k = sqrt(omega^2 - m^2)``, ``omega = w' + m - gap``.

    Below threshold the entire continuation ``cosh(sqrt(m^2 - omega^2) L)`` is used.
    """
    if L < 0:
        raise ValueError("L must be non-negative")
    m, gap = cfg.mass, cfg.gap

    def target(omega_p):
        w = np.asarray(omega_p, dtype=float) + m - gap
        q = w * w - m * m
        out = np.where(q >= 0, np.cos(np.sqrt(np.abs(q)) * L), np.cosh(np.sqrt(np.abs(q)) * L))
        return float(out) if out.ndim == 0 else out

    return target


def i1_over_x(x):
    """``I1(x)/x`` by its positive power series (no cancellation for real ``x``)."""
    x = np.asarray(x, dtype=float)
    q = 0.25 * x * x
    term = np.full(x.shape, 0.5)
    total = term.copy()
    j = 0
    top = float(np.max(q)) if q.size else 0.0
    while True:
        j += 1
        term = term * q / (j * (j + 1))
        total = total + term
        if j > top and np.all(term <= 1e-17 * total):
            return total


def mirror_pair_profile(L: float, cfg: FieldConfig) -> superosc.TimeProfile:
    """Exact time profile (in the ``w'`` convention) of the mirror-pair target.

    ``cos(k L) = cos(omega L) + (m L / 2) int_{-L}^{L} I1(m s)/s e^{i omega t} dt``
    with ``s = sqrt(L^2 - t^2)``: two point masses at ``t' = +-L`` plus a smooth
    density, all carrying the factor ``exp(i (m - gap) t')``.
    """
    m, gap = cfg.mass, cfg.gap
    shift = m - gap

    def density(t):
        t = np.asarray(t, dtype=float)
        inside = np.abs(t) <= L
        s = np.sqrt(np.clip(L * L - t * t, 0.0, None))
        val = 0.5 * m * m * L * i1_over_x(m * s) * np.exp(1j * shift * t)
        return np.where(inside, val, 0.0)

    atoms = ((L, 0.5 * np.exp(1j * shift * L)), (-L, 0.5 * np.exp(-1j * shift * L)))
    return superosc.TimeProfile(density, atoms, (-L, L), desired_spectrum_mirror_pair(L, cfg))


def synthesize_mirror_pair(L: float, cfg: FieldConfig, omega_c: float, n_terms: int = 256,
                           t0: float = 1.0, **kw) -> superosc.SynthesisResult:
    return superosc.synthesize_window(mirror_pair_profile(L, cfg), omega_c, n_terms, t0=t0, **kw)


# --------------------------------------------------------------------------
# states
# --------------------------------------------------------------------------

def _measure(k, dim):
    """Quadrature weights for ``d^dk / (2 pi)^d`` (signed grid in d = 1, radial otherwise)."""
    w = np.empty_like(k)
    h = np.diff(k)
    w[0] = 0.5 * h[0]
    w[-1] = 0.5 * h[-1]
    w[1:-1] = 0.5 * (h[:-1] + h[1:])
    if dim == 1:
        return w / (2.0 * math.pi)
    area = 2.0 * math.pi if dim == 2 else 4.0 * math.pi
    return w * area * k ** (dim - 1) / (2.0 * math.pi) ** dim


@dataclass
class OneParticleState:
    k_grid: np.ndarray
    amplitudes: np.ndarray
    dim: int = 1
    norm: float = field(init=False)

    def __post_init__(self):
        self.k_grid = np.asarray(self.k_grid, dtype=float)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.k_grid.shape != self.amplitudes.shape:
            raise ValueError("OneParticleState: grid and amplitudes differ in shape")
        if not np.all(np.isfinite(self.amplitudes)):
            raise ValueError("OneParticleState: non-finite amplitudes")
        self.norm = float(np.sum(_measure(self.k_grid, self.dim) * np.abs(self.amplitudes) ** 2))

    def inner(self, other: "OneParticleState") -> complex:
        if self.k_grid.shape != other.k_grid.shape or not np.allclose(self.k_grid, other.k_grid, rtol=1e-12, atol=0):
            raise GridMismatchError("states live on different momentum grids")
        return complex(np.sum(_measure(self.k_grid, self.dim) * np.conj(self.amplitudes) * other.amplitudes))

    def normalized(self) -> "OneParticleState":
        if not self.norm > 0:
            raise ZeroNormError("state has zero norm on its grid")
        return OneParticleState(self.k_grid, self.amplitudes / math.sqrt(self.norm), self.dim)


def signed_k_grid(cfg: FieldConfig, omega_c: float, n: int = K_POINTS, factor: float = K_FACTOR):
    k_max = factor * float(cfg.k_of(omega_c))
    if not k_max > 0:
        raise ValueError("omega_c must exceed the threshold")
    return np.linspace(-k_max, k_max, n + 1)


def _weights_transform(weights, k):
    if weights is None:
        return np.ones_like(k)
    if callable(weights):
        return np.asarray(weights(k), dtype=complex)
    if hasattr(weights, "transform"):
        return np.asarray(weights.transform(k), dtype=complex)
    out = np.zeros(k.shape, dtype=complex)
    for x, c in weights:
        out = out + c * np.exp(-1j * k * x)
    return out


def generated_state(window, cfg: FieldConfig, omega_c: float, weights=None,
                    grid=None, spectrum=None) -> OneParticleState:
    """Normalized one-particle state ``eps(w'(k)) W(k) / sqrt(2 omega(k))``.

    ``weights`` is ``None`` (single point), a callable ``k -> W(k)``, an object
    with ``transform(k)``, or a list of ``(position, weight)`` pairs.
    """
    if grid is None:
        grid = signed_k_grid(cfg, omega_c) if cfg.dim == 1 else k_grid(cfg, omega_c)
    k = np.asarray(grid, dtype=float)
    # the spectrum depends on |k| only; evaluate each magnitude once
    kk, inverse = np.unique(np.abs(k), return_inverse=True)
    eps = spectrum(cfg.omega_prime(kk)) if spectrum is not None else _window_on_k(window, kk, cfg)
    eps = np.asarray(eps)[inverse]
    amp = eps * _weights_transform(weights, k) / np.sqrt(2.0 * dispersion(np.abs(k), cfg))
    return OneParticleState(k, amp, cfg.dim).normalized()


def desired_state(profile, cfg: FieldConfig, omega_c: float, grid=None, support=None,
                  n_x: int = 8193) -> OneParticleState:
    """Normalized state ``F(k) / sqrt(2 omega(k))`` for a position-space target.

    ``profile`` is a callable of ``x`` (integrated over ``support`` by exact
    piecewise-linear transforms) or, with ``support=None`` and a
    ``spectrum`` attribute, already a momentum-space function.
    """
    if grid is None:
        grid = signed_k_grid(cfg, omega_c) if cfg.dim == 1 else k_grid(cfg, omega_c)
    k = np.asarray(grid, dtype=float)
    if support is None:
        ft = np.asarray(profile(k), dtype=complex)
    elif cfg.dim == 1:
        x = np.linspace(support[0], support[1], n_x)
        ft = transforms.filon_linear(x, np.asarray(profile(x), dtype=complex), -k)
    else:
        ft = radial_transform(profile, support[1], k, cfg.dim, n_x)
    amp = ft / np.sqrt(2.0 * dispersion(np.abs(k), cfg))
    return OneParticleState(k, amp, cfg.dim).normalized()


_RADIAL_BLOCK = 2 ** 21


def radial_transform(profile, r_max, k, dim, n_r=8193):
    """Transform of a radial profile: ``(2 pi)^{d/2} int r^{d-1} F(r) J_{d/2-1}(kr)/(kr)^{d/2-1} dr``."""
    if n_r < 3 or n_r % 2 == 0:
        raise ValueError("n_r must be odd and at least 3")
    r = np.linspace(0.0, r_max, n_r)
    # Simpson weights; the d = 2 integrand has a nonzero slope at r = 0,
    # which costs a trapezoid rule O(h^2)
    wts = np.full(n_r, 2.0)
    wts[1::2] = 4.0
    wts[0] = wts[-1] = 1.0
    wts *= (r[1] - r[0]) / 3.0
    f = np.asarray(profile(r), dtype=complex) * r ** (dim - 1) * wts
    k = np.asarray(k, dtype=float)
    out = np.empty(k.size, dtype=complex)
    step = max(1, _RADIAL_BLOCK // n_r)
    for s in range(0, k.size, step):
        kr = np.outer(k[s:s + step], r)
        if dim == 3:
            kern = 4.0 * math.pi * specfun.sph_bessel(0, kr.ravel()).reshape(kr.shape)
        elif dim == 2:
            kern = 2.0 * math.pi * np.real(specfun.bessel_j0(kr.ravel() + 0j)).reshape(kr.shape)
        else:
            kern = 2.0 * np.cos(kr)
        out[s:s + step] = kern @ f
    return out


def mirror_pair_state(L: float, cfg: FieldConfig, omega_c: float, grid=None) -> OneParticleState:
    """State of two equal point sources at ``+-L``, i.e. ``2 cos(kL) / sqrt(2 omega)``."""
    return desired_state(lambda k: 2.0 * np.cos(k * L), cfg, omega_c, grid=grid)


def fidelity(a: OneParticleState, b: OneParticleState) -> float:
    if not (a.norm > 0 and b.norm > 0):
        raise ZeroNormError("fidelity of a zero-norm state")
    val = abs(a.inner(b)) / math.sqrt(a.norm * b.norm)
    return min(1.0, val)


def infidelity_tail(target: OneParticleState, omega_c: float, cfg: FieldConfig) -> float:
    """Estimate ``(1/w_c) int_{w' > w_c} |F(k)|^2 d^dk`` of what a cutoff at ``w_c`` misses."""
    t = target.normalized() if abs(target.norm - 1.0) > 1e-12 else target
    k = t.k_grid
    if t.dim == 1:
        dens = np.abs(t.amplitudes) ** 2 / (2.0 * math.pi)
    else:
        area = 2.0 * math.pi if t.dim == 2 else 4.0 * math.pi
        dens = np.abs(t.amplitudes) ** 2 * area * k ** (t.dim - 1) / (2.0 * math.pi) ** t.dim
    kc = float(cfg.k_of(omega_c))
    # trapezoid on the part of each cell beyond |k| = kc, density interpolated linearly
    lo, hi = k[:-1], k[1:]
    d_lo, d_hi = dens[:-1], dens[1:]
    tail = 0.0
    for a, b in ((kc, np.inf), (-np.inf, -kc)):
        x0, x1 = np.clip(lo, a, b), np.clip(hi, a, b)
        keep = x1 > x0
        frac0 = (x0[keep] - lo[keep]) / (hi[keep] - lo[keep])
        frac1 = (x1[keep] - lo[keep]) / (hi[keep] - lo[keep])
        f0 = d_lo[keep] + frac0 * (d_hi[keep] - d_lo[keep])
        f1 = d_lo[keep] + frac1 * (d_hi[keep] - d_lo[keep])
        tail += float(np.sum(0.5 * (f0 + f1) * (x1[keep] - x0[keep])))
        if t.dim != 1:
            break
    return tail / omega_c


def position_profile(state: OneParticleState, x):
    """``psi(x) = int dk/(2 pi) a(k) e^{ikx}`` for a signed d = 1 grid."""
    if state.dim != 1:
        raise ValueError("position_profile: d = 1 only")
    return transforms.filon_linear(state.k_grid, state.amplitudes, np.asarray(x, dtype=float)) / (2.0 * math.pi)


# --------------------------------------------------------------------------
# scaling and noise
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SuccessEstimate:
    delta_amp: float
    log_delta: float
    log_P: float
    log_delta_block: float
    log_delta_domain: float
    reach: float
    covers: bool


def success_probability_estimate(p: superosc.SuperoscParams, L: float, omega_c: float) -> SuccessEstimate:
    """Scaling of the post-selection probability ``P ~ Delta^2``.

    The headline ``log Delta = -w_c L^2 / t0`` (zero without superoscillation,
    ``A = 0``) drops order-one prefactors.  Also returned: the block value
    ``-sinh(A)/delta^2`` and the domain form ``-w_c T sinh(A)`` with
    ``T = t0 (cosh A + 1) / 2``.
    """
    if L <= 0 or omega_c <= 0:
        raise ValueError("L and omega_c must be positive")
    A, t0 = p.A, p.t0
    T = 0.5 * t0 * (math.cosh(A) + 1.0)
    log_delta = 0.0 if A == 0 else -omega_c * L * L / t0
    return SuccessEstimate(math.exp(log_delta), log_delta, 2.0 * log_delta,
                           -math.sinh(A) / p.delta ** 2, -omega_c * T * math.sinh(A), T, T >= L)


@dataclass(frozen=True)
class NoiseSpec:
    amplitude: float
    profile: SampledFunction
    seed: int = 0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("noise amplitude must be non-negative")

    @classmethod
    def random(cls, amplitude, t0=1.0, n=NOISE_POINTS, seed=0):
        """Piecewise-linear noise on ``[-t0, 0]`` with iid unit-variance complex samples."""
        rng = np.random.default_rng(seed)
        t = np.linspace(-t0, 0.0, n)
        v = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)
        return cls(amplitude, SampledFunction(t, v), seed)


def inject_noise(window: Window, noise: NoiseSpec) -> Window:
    g = noise.profile.grid
    if g[0] < -window.t0 * (1 + 1e-12) or g[-1] > 1e-12 * window.t0:
        raise ValueError("noise support must lie in [-t0, 0]")
    if noise.amplitude == 0:
        return window
    return SumWindow([(1.0, window), (noise.amplitude, SampledWindow(g, noise.profile.values, t0=window.t0))])


def _position_masses(k, amplitude_sets, t0, L, n_x):
    """Position-space mass inside ``|x| <= t0`` and in total, for incoherent states."""
    X = 3.0 * max(L, t0)
    x = np.linspace(-X, X, n_x)
    inside = np.abs(x) <= t0
    psi = transforms.filon_linear(k, np.column_stack(amplitude_sets), x)
    dens = np.sum(np.abs(psi) ** 2, axis=1)
    return float(np.trapezoid(np.where(inside, dens, 0.0), x)), float(np.trapezoid(dens, x))


def causal_leakage(window, L: float, cfg: FieldConfig, omega_c: float, n_x: int = 1201,
                   state: Optional[OneParticleState] = None) -> float:
    """Fraction of position-space probability inside the source light cone ``|x| <= t0``."""
    if state is None:
        state = generated_state(window, cfg, omega_c)
    t0 = window.t0 if window is not None else 1.0
    inside, total = _position_masses(state.k_grid, [state.amplitudes], t0, L, n_x)
    return inside / total


def _hat_spectra(t_grid, omega):
    """Spectra of the piecewise-linear hat functions on ``t_grid``."""
    return transforms.filon_weights(t_grid, omega).T


@dataclass(frozen=True)
class NoiseThreshold:
    nu_c: float
    log_nu_c_relative: float
    log_nu_c_estimate: float


def noise_threshold(window: Window, omega_c: float, L: float, n_noise: int = NOISE_POINTS,
                    n_omega: int = 1025) -> NoiseThreshold:
    """Noise amplitude whose expected in-band power equals the window's.

    Noise is ordinary (not superoscillatory), so its spectrum is ``O(nu)``
    while the window's in-band spectrum is exponentially smaller than
    ``sup|eps|``.  ``log_nu_c_relative`` is ``log(nu_c / sup|eps|)``, reported
    next to the closed-form estimate ``-w_c L^2 / t0``.
    """
    w = np.linspace(0.0, omega_c, n_omega)
    vals, scale = window.spectrum_scaled(w)
    top = float(np.max(scale))
    signal = np.mean(np.abs(vals) ** 2 * np.exp(2.0 * (scale - top)))
    hats = _hat_spectra(np.linspace(-window.t0, 0.0, n_noise), w)
    noise = np.mean(np.sum(np.abs(hats) ** 2, axis=0))
    log_nu = 0.5 * math.log(signal / noise) + top
    return NoiseThreshold(math.exp(log_nu) if log_nu < 700 else math.inf,
                          log_nu - window.log_peak(), -omega_c * L * L / window.t0)


@dataclass(frozen=True)
class NoiseSweepRow:
    factor: float
    amplitude: float
    fidelity: float
    leakage: float
    fidelity_sample: float = math.nan
    leakage_sample: float = math.nan


def noise_sweep(window: Window, L: float, cfg: FieldConfig, omega_c: float,
                factors: Sequence[float], n_noise: int = NOISE_POINTS, n_x: int = 601,
                seed: Optional[int] = None):
    """Expected mirror-pair fidelity and light-cone leakage versus noise amplitude.

    Averages over noise with iid unit-variance samples, which reduces to an
    incoherent sum over the hat-function basis: the generated state becomes
    ``rho = |s><s| + nu^2 sum_j |h_j><h_j|``.  Fidelity is
    ``sqrt(<t|rho|t> / tr rho)`` against the normalized target.  With a
    ``seed`` one realization (:meth:`NoiseSpec.random`) is evaluated as well.
    """
    th = noise_threshold(window, omega_c, L, n_noise)
    grid = signed_k_grid(cfg, omega_c)
    kk, inverse = np.unique(np.abs(grid), return_inverse=True)
    wp = cfg.omega_prime(kk)
    root = np.sqrt(2.0 * dispersion(kk, cfg))
    sig = (_window_on_k(window, kk, cfg) / root)[inverse]
    hats = (_hat_spectra(np.linspace(-window.t0, 0.0, n_noise), wp) / root)[:, inverse]
    target = mirror_pair_state(L, cfg, omega_c, grid=grid)
    mu = _measure(grid, 1)

    def inner(a, b):
        return np.sum(mu * np.conj(a) * b)

    s_t = abs(inner(target.amplitudes, sig)) ** 2
    s_n = float(np.real(inner(sig, sig)))
    h_t = sum(abs(inner(target.amplitudes, h)) ** 2 for h in hats)
    h_n = sum(float(np.real(inner(h, h))) for h in hats)
    # position densities are linear in the incoherent weights
    in_s, tot_s = _position_masses(grid, [sig], window.t0, L, n_x)
    in_h, tot_h = _position_masses(grid, list(hats), window.t0, L, n_x)
    rows = []
    for f in factors:
        nu2 = (f * th.nu_c) ** 2
        fid = math.sqrt((s_t + nu2 * h_t) / (s_n + nu2 * h_n))
        leak = (in_s + nu2 * in_h) / (tot_s + nu2 * tot_h)
        f_s = l_s = math.nan
        if seed is not None:
            v = NoiseSpec.random(1.0, window.t0, n_noise, seed).profile.values
            amp = sig + f * th.nu_c * (v @ hats)
            f_s = fidelity(OneParticleState(grid, amp), target)
            inside, total = _position_masses(grid, [amp], window.t0, L, n_x)
            l_s = inside / total
        rows.append(NoiseSweepRow(float(f), float(f * th.nu_c), min(1.0, fid), float(leak), f_s, l_s))
    return th, rows


# --------------------------------------------------------------------------
# several particles
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ParticleTarget:
    """Mirror-pair target around ``site``; ``L`` lists one separation per label."""
    site: float
    L: tuple

    @property
    def region(self):
        reach = max(self.L)
        return (self.site - reach, self.site + reach)


@dataclass
class MultiParticlePlan:
    syntheses: list
    fidelities: list
    joint_fidelity: float


def multi_particle_plan(targets: Sequence[ParticleTarget], cfg: FieldConfig, omega_c: float,
                        coefficients: Optional[dict] = None, n_terms: int = 256,
                        t0: float = 1.0) -> MultiParticlePlan:
    """One synthesis per particle and label; joint fidelity of the product state.

    Without ``coefficients`` every particle uses its first label and the joint
    fidelity is the product of single fidelities.  ``coefficients`` maps label
    tuples to amplitudes of an entangled target; the generated superposition
    uses the same table with each factor replaced by its synthesized state.
    """
    regions = sorted((t.region for t in targets))
    for (lo1, hi1), (lo2, hi2) in zip(regions, regions[1:]):
        if lo2 - hi1 <= 2.0 * t0:
            raise OverlapError("source regions must be separated by more than 2 t0")
    grid = signed_k_grid(cfg, omega_c)
    syntheses, gen, exact = [], [], []
    for tgt in targets:
        s_i, g_i, e_i = [], [], []
        for L in tgt.L:
            res = synthesize_mirror_pair(L, cfg, omega_c, n_terms, t0=t0)
            s_i.append(res)
            g_i.append(generated_state(res.window, cfg, omega_c, grid=grid))
            e_i.append(mirror_pair_state(L, cfg, omega_c, grid=grid))
        syntheses.append(s_i)
        gen.append(g_i)
        exact.append(e_i)
    singles = [fidelity(g[0], e[0]) for g, e in zip(gen, exact)]
    if coefficients is None:
        return MultiParticlePlan(syntheses, singles, float(np.prod(singles)))

    labels = list(coefficients)
    coef = np.array([coefficients[lab] for lab in labels], dtype=complex)

    def gram(left, right):
        out = np.empty((len(labels), len(labels)), dtype=complex)
        for a, la in enumerate(labels):
            for b, lb in enumerate(labels):
                out[a, b] = np.prod([left[i][la[i]].inner(right[i][lb[i]]) for i in range(len(targets))])
        return out

    gg = np.real(coef.conj() @ gram(gen, gen) @ coef)
    ee = np.real(coef.conj() @ gram(exact, exact) @ coef)
    ge = coef.conj() @ gram(gen, exact) @ coef
    joint = float(min(1.0, abs(ge) / math.sqrt(gg * ee)))
    return MultiParticlePlan(syntheses, singles, joint)
