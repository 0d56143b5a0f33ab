"""Numba switch for the hot kernels.

Set ``SUPEROSC_DISABLE_NUMBA=1`` before import to force the pure-numpy
path (also used when numba is not installed).
"""
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("SUPEROSC_DISABLE_NUMBA", "0") not in ("1", "true", "yes")


def njit(func):
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, fastmath=False)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
