"""Bessel-type special functions used throughout the package.

Every public function accepts scalars or arrays and dispatches to a numba
kernel or to a vectorized numpy kernel (see ``_accel``).  Both paths use the
same algorithms:

* ``J0`` of complex argument: power series for ``|z| <= 8``, Miller backward
  recurrence normalized by the generating function ``exp(+-iz)`` for
  ``8 < |z| < 30`` and the Hankel asymptotic expansion beyond.
* spherical ``j_l``: short power series near the origin, upward recurrence for
  ``x > l`` and Miller downward recurrence otherwise.
* ``K0``: trapezoid rule on ``int_0^inf exp(-x cosh t) dt`` (converges
  geometrically because the integrand is analytic in a strip).
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

SERIES_RADIUS = 8.0
HANKEL_RADIUS = 30.0
_HANKEL_TERMS = 30
MAX_ORDER = 50
_LOG_HUGE = 709.0
MAX_ARGUMENT = 1e8


# --------------------------------------------------------------------------
# J0, complex argument
# --------------------------------------------------------------------------

@njit
def _j0e_scalar(z):
    """J0(z) * exp(-|Im z|)."""
    az = abs(z)
    shrink = math.exp(-abs(z.imag))
    if az <= SERIES_RADIUS:
        w = -(z * z) / 4.0
        term = 1.0 + 0.0j
        s = 1.0 + 0.0j
        for k in range(1, 200):
            term = term * w / (k * k)
            s += term
            if abs(term) < 1e-17 and k > az:
                break
        return s * shrink
    if z.real < 0.0:
        z = -z
    if az < HANKEL_RADIUS:
        c = 1j if z.imag <= 0.0 else -1j
        target = np.exp(c * z - abs(z.imag))
        n_start = int(az) + 40 + int(2.0 * math.sqrt(az))
        f_next = 0.0 + 0.0j
        f_cur = 1e-30 + 0.0j
        cpow = c ** n_start
        s = 0.0 + 0.0j
        for n in range(n_start, 0, -1):
            s += 2.0 * cpow * f_cur
            f_prev = (2.0 * n / z) * f_cur - f_next
            f_next = f_cur
            f_cur = f_prev
            cpow = cpow / c
            if abs(f_cur) > 1e250:
                f_cur *= 1e-250
                f_next *= 1e-250
                s *= 1e-250
        s += f_cur
        return f_cur * target / s
    chi = z - math.pi / 4.0
    p = 1.0 + 0.0j
    q = 0.0 + 0.0j
    a = 1.0
    zk = 1.0 + 0.0j
    last = 1.0
    for k in range(1, _HANKEL_TERMS):
        a = a * (-(2.0 * k - 1.0) ** 2) / (8.0 * k)
        zk = zk / z
        term = a * zk
        mag = abs(term)
        if mag > last:
            break
        last = mag
        # a_k already carries its sign
        if k % 2 == 0:
            p += term * (-1.0) ** (k // 2)
        else:
            q += term * (-1.0) ** ((k - 1) // 2)
        if mag < 1e-17:
            break
    ep = np.exp(1j * chi - abs(z.imag))
    em = np.exp(-1j * chi - abs(z.imag))
    cos_s = 0.5 * (ep + em)
    sin_s = (ep - em) / 2j
    return np.sqrt(2.0 / (math.pi * z)) * (p * cos_s - q * sin_s)


@njit
def _j0e_loop(z):
    out = np.empty(z.shape, dtype=np.complex128)
    for i in range(z.size):
        out.flat[i] = _j0e_scalar(z.flat[i])
    return out


def _j0_series_np(z):
    w = -(z * z) / 4.0
    term = np.ones_like(z)
    s = np.ones_like(z)
    for k in range(1, 80):
        term = term * w / (k * k)
        s = s + term
    return s


def _j0e_series_np(z):
    return _j0_series_np(z) * np.exp(-np.abs(z.imag))


def _j0e_miller_np(z):
    az = np.abs(z)
    c = np.where(z.imag <= 0.0, 1j, -1j)
    target = np.exp(c * z - np.abs(z.imag))
    n_start = int(az.max()) + 40 + int(2.0 * math.sqrt(az.max()))
    f_next = np.zeros_like(z)
    f_cur = np.full_like(z, 1e-30)
    cpow = c ** n_start
    s = np.zeros_like(z)
    for n in range(n_start, 0, -1):
        s = s + 2.0 * cpow * f_cur
        f_prev = (2.0 * n / z) * f_cur - f_next
        f_next = f_cur
        f_cur = f_prev
        cpow = cpow / c
        big = np.abs(f_cur) > 1e250
        if big.any():
            scale = np.where(big, 1e-250, 1.0)
            f_cur = f_cur * scale
            f_next = f_next * scale
            s = s * scale
    s = s + f_cur
    return f_cur * target / s


def _j0e_hankel_np(z):
    chi = z - math.pi / 4.0
    p = np.ones_like(z)
    q = np.zeros_like(z)
    a = 1.0
    zk = np.ones_like(z)
    for k in range(1, _HANKEL_TERMS):
        a = a * (-(2.0 * k - 1.0) ** 2) / (8.0 * k)
        zk = zk / z
        term = a * zk
        if k % 2 == 0:
            p = p + term * (-1.0) ** (k // 2)
        else:
            q = q + term * (-1.0) ** ((k - 1) // 2)
    ep = np.exp(1j * chi - np.abs(z.imag))
    em = np.exp(-1j * chi - np.abs(z.imag))
    return np.sqrt(2.0 / (np.pi * z)) * (p * 0.5 * (ep + em) - q * (ep - em) / 2j)


def _j0e_numpy(z):
    out = np.empty(z.shape, dtype=np.complex128)
    az = np.abs(z)
    series = az <= SERIES_RADIUS
    zr = np.where(z.real < 0.0, -z, z)
    miller = ~series & (az < HANKEL_RADIUS)
    hankel = az >= HANKEL_RADIUS
    if series.any():
        out[series] = _j0e_series_np(z[series])
    if miller.any():
        out[miller] = _j0e_miller_np(zr[miller])
    if hankel.any():
        out[hankel] = _j0e_hankel_np(zr[hankel])
    return out


def bessel_j0e(z):
    """Exponentially scaled ``J0(z) * exp(-|Im z|)`` for complex ``z``."""
    arr = np.asarray(z, dtype=np.complex128)
    if np.any(~np.isfinite(arr)):
        raise ValueError("bessel_j0e: non-finite argument")
    if np.any(np.abs(arr) >= MAX_ARGUMENT):
        raise ValueError(f"bessel_j0: |z| must be below {MAX_ARGUMENT:g}")
    flat = np.atleast_1d(arr)
    out = _j0e_loop(flat) if USE_NUMBA else _j0e_numpy(flat)
    return out.reshape(arr.shape) if arr.ndim else complex(out[0])


def bessel_j0(z):
    """Bessel J0 of a complex (or real) argument.

    Raises ``OverflowError`` when ``exp(|Im z|)`` leaves the double range;
    use :func:`bessel_j0e` there.
    """
    arr = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(arr.imag) > _LOG_HUGE):
        worst = float(np.max(np.abs(arr.imag)))
        raise OverflowError(f"bessel_j0: |J0| ~ exp({worst:.1f}) overflows")
    out = np.atleast_1d(bessel_j0e(arr) * np.exp(np.abs(arr.imag)))
    flat = np.atleast_1d(arr)
    # unscaled series near the origin avoids a rounding round trip
    small = np.abs(flat) <= SERIES_RADIUS
    if small.any():
        out[small] = _j0_series_np(flat[small])
    return out.reshape(arr.shape) if arr.ndim else complex(out[0])


# --------------------------------------------------------------------------
# spherical Bessel j_l, real argument
# --------------------------------------------------------------------------

@njit
def _sph_scalar(l, x):
    if x == 0.0:
        return 1.0 if l == 0 else 0.0
    if x < 1.0 or x * x < 2.0 * l + 3.0:
        lead = 1.0
        for k in range(1, l + 1):
            lead *= x / (2.0 * k + 1.0)
        w = -0.5 * x * x
        term = 1.0
        s = 1.0
        for k in range(1, 300):
            term *= w / (k * (2.0 * l + 2.0 * k + 1.0))
            s += term
            if abs(term) < 1e-18 * abs(s):
                break
        return lead * s
    sx = math.sin(x)
    cx = math.cos(x)
    j0 = sx / x
    j1 = sx / (x * x) - cx / x
    if l == 0:
        return j0
    if l == 1:
        return j1
    if x > l:
        jm = j0
        jc = j1
        for n in range(1, l):
            jn = (2.0 * n + 1.0) / x * jc - jm
            jm = jc
            jc = jn
        return jc
    n_start = l + 20 + int(math.sqrt(40.0 * (l + x)))
    f_next = 0.0
    f_cur = 1e-300
    f_l = 0.0
    f_1 = 0.0
    for n in range(n_start, 0, -1):
        f_prev = (2.0 * n + 1.0) / x * f_cur - f_next
        f_next = f_cur
        f_cur = f_prev
        if n - 1 == l:
            f_l = f_cur
        if n - 1 == 1:
            f_1 = f_cur
        if abs(f_cur) > 1e250:
            f_cur *= 1e-250
            f_next *= 1e-250
            f_l *= 1e-250
            f_1 *= 1e-250
    if abs(j0) >= abs(j1):
        return f_l * (j0 / f_cur)
    return f_l * (j1 / f_1)


@njit
def _sph_loop(l, x):
    out = np.empty(x.shape, dtype=np.float64)
    for i in range(x.size):
        out.flat[i] = _sph_scalar(l, x.flat[i])
    return out


def _sph_numpy(l, x):
    out = np.empty_like(x)
    zero = x == 0.0
    out[zero] = 1.0 if l == 0 else 0.0
    small = ~zero & ((x < 1.0) | (x * x < 2.0 * l + 3.0))
    if small.any():
        xs = x[small]
        lead = np.ones_like(xs)
        for k in range(1, l + 1):
            lead = lead * xs / (2.0 * k + 1.0)
        w = -0.5 * xs * xs
        term = np.ones_like(xs)
        s = np.ones_like(xs)
        for k in range(1, 120):
            term = term * w / (k * (2.0 * l + 2.0 * k + 1.0))
            s = s + term
        out[small] = lead * s
    rest = ~zero & ~small
    if not rest.any():
        return out
    xr = x[rest]
    sx, cx = np.sin(xr), np.cos(xr)
    j0 = sx / xr
    j1 = sx / (xr * xr) - cx / xr
    if l <= 1:
        out[rest] = j0 if l == 0 else j1
        return out
    res = np.empty_like(xr)
    up = xr > l
    if up.any():
        jm, jc = j0[up], j1[up]
        xu = xr[up]
        for n in range(1, l):
            jm, jc = jc, (2.0 * n + 1.0) / xu * jc - jm
        res[up] = jc
    down = ~up
    if down.any():
        xd = xr[down]
        n_start = l + 20 + int(math.sqrt(40.0 * (l + xd.max())))
        f_next = np.zeros_like(xd)
        f_cur = np.full_like(xd, 1e-300)
        f_l = np.zeros_like(xd)
        f_1 = np.zeros_like(xd)
        for n in range(n_start, 0, -1):
            f_prev = (2.0 * n + 1.0) / xd * f_cur - f_next
            f_next, f_cur = f_cur, f_prev
            if n - 1 == l:
                f_l = f_cur.copy()
            if n - 1 == 1:
                f_1 = f_cur.copy()
            big = np.abs(f_cur) > 1e250
            if big.any():
                sc = np.where(big, 1e-250, 1.0)
                f_cur, f_next, f_l, f_1 = f_cur * sc, f_next * sc, f_l * sc, f_1 * sc
        j0d, j1d = j0[down], j1[down]
        use0 = np.abs(j0d) >= np.abs(j1d)
        res[down] = np.where(use0, f_l * (j0d / f_cur), f_l * (j1d / np.where(use0, 1.0, f_1)))
    out[rest] = res
    return out


def sph_bessel(l, x):
    """Spherical Bessel function ``j_l(x)`` for integer ``0 <= l <= 50``, ``x >= 0``."""
    l = int(l)
    if l < 0 or l > MAX_ORDER:
        raise ValueError(f"sph_bessel: order {l} outside [0, {MAX_ORDER}]")
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(~np.isfinite(arr)):
        raise ValueError("sph_bessel: argument must be finite and >= 0")
    flat = np.atleast_1d(arr)
    out = _sph_loop(l, flat) if USE_NUMBA else _sph_numpy(l, flat.copy())
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def _sph_derivative(l, x):
    if l == 0:
        return -sph_bessel(1, x)
    return sph_bessel(l - 1, x) - (l + 1) / x * sph_bessel(l, x)


def sph_bessel_first_zero(l, tol=1e-13):
    """Smallest positive zero of ``j_l``: sign scan, bisection, Newton polish."""
    l = int(l)
    if l < 0 or l > MAX_ORDER:
        raise ValueError(f"sph_bessel_first_zero: order {l} outside [0, {MAX_ORDER}]")
    # j_l > 0 on (0, Z_l1) and Z_l1 > l + 1
    lo = max(float(l), 0.5)
    step = 0.25
    hi = lo + step
    while sph_bessel(l, hi) > 0.0:
        lo, hi = hi, hi + step
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sph_bessel(l, mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    x = 0.5 * (lo + hi)
    for _ in range(3):
        dx = sph_bessel(l, x) / _sph_derivative(l, x)
        if abs(dx) > hi - lo + tol:
            break
        x -= dx
    return x


# --------------------------------------------------------------------------
# K0, real argument
# --------------------------------------------------------------------------

_K0_STEP = 0.125


@njit
def _k0_scalar(x):
    h = min(_K0_STEP, 0.3 / math.sqrt(x))
    t_max = math.acosh(745.0 / x) + 1.0 if x < 745.0 else 1.0
    n = int(t_max / h) + 1
    s = 0.5 * math.exp(-x)
    for k in range(1, n + 1):
        s += math.exp(-x * math.cosh(k * h))
    return h * s


@njit
def _k0_loop(x):
    out = np.empty(x.shape, dtype=np.float64)
    for i in range(x.size):
        out.flat[i] = _k0_scalar(x.flat[i])
    return out


def _k0_numpy(x):
    # step shrinks like 1/sqrt(x) to resolve the Gaussian peak at t = 0
    h = np.minimum(_K0_STEP, 0.3 / np.sqrt(x))
    t_max = np.arccosh(745.0 / np.minimum(x.min(), 744.0)) + 1.0
    k = np.arange(1, int(t_max / h.min()) + 2)
    body = np.exp(-x[:, None] * np.cosh(np.outer(h, k))).sum(axis=1)
    return h * (0.5 * np.exp(-x) + body)


def bessel_k0(x):
    """Modified Bessel function ``K0(x)`` for ``x > 0``."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(~(arr > 0.0)):
        raise ValueError("bessel_k0: argument must be > 0")
    flat = np.atleast_1d(arr)
    out = _k0_loop(flat) if USE_NUMBA else _k0_numpy(flat)
    return out.reshape(arr.shape) if arr.ndim else float(out[0])
