"""Numba switch.

Set ``LORENTZMAX_NO_JIT=1`` to run the vectorised numpy kernels instead of
the compiled loops (also the automatic choice when numba is missing).
"""
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_JIT = HAVE_NUMBA and os.environ.get("LORENTZMAX_NO_JIT", "0").lower() in ("", "0", "false", "no")


def njit(*args, **kwargs):
    if HAVE_NUMBA:
        return numba.njit(*args, cache=True, **kwargs)

    def wrap(fn):
        return fn

    return wrap
