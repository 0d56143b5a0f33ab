"""Time the numba kernels against their pure-numpy fallbacks.

Run with ``python benchmarks/bench_kernels.py [--repeat R]``.  Both paths are
called directly, so the ``SUPEROSC_DISABLE_NUMBA`` flag does not matter here.
"""
import argparse
import time

import numpy as np

from superosc_rsp import specfun, superosc
from superosc_rsp._accel import HAVE_NUMBA


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    z = rng.uniform(-60, 60, 200_000) + 1j * rng.uniform(-40, 40, 200_000)
    x = rng.uniform(0, 80, 100_000)
    k = rng.uniform(0.05, 40, 50_000)
    w = np.linspace(0, 10, 2000)
    a = np.linspace(0, 2.3, 64)
    cp = rng.standard_normal(64) + 0j
    cm = 1j * cp
    dp, dm = 0.005, 0.0051
    yield ("bessel_j0e", lambda: specfun._j0e_loop(z), lambda: specfun._j0e_numpy(z), z.size)
    yield ("sph_bessel l=7", lambda: specfun._sph_loop(7, x), lambda: specfun._sph_numpy(7, x), x.size)
    yield ("bessel_k0", lambda: specfun._k0_loop(k), lambda: specfun._k0_numpy(k), k.size)
    yield ("variant sum 64x2", lambda: superosc._variant_sum_loop(w, a, cp, cm, dp, dm, 1.0, 1.0),
           lambda: superosc._variant_sum_numpy(w, a, cp, cm, dp, dm, 1.0, 1.0), w.size * a.size * 2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    print(f"{'kernel':<20}{'evals':>10}{'numba s':>12}{'numpy s':>12}{'speedup':>10}{'max diff':>12}")
    for name, fast, slow, n in cases():
        ref_fast = fast()  # compile outside the timing
        ref_slow = slow()
        if isinstance(ref_fast, tuple):
            diff = np.max(np.abs(ref_fast[0] * np.exp(ref_fast[1]) - ref_slow[0] * np.exp(ref_slow[1])))
        else:
            diff = np.max(np.abs(np.asarray(ref_fast) - np.asarray(ref_slow)))
        tf = best_of(fast, args.repeat)
        ts = best_of(slow, args.repeat)
        print(f"{name:<20}{n:>10}{tf:>12.4f}{ts:>12.4f}{ts / tf:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
