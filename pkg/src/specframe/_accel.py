"""Numba switch.

Set ``SPECFRAME_DISABLE_NUMBA=1`` to force the pure-numpy kernels. The
flag is read once at import time; :func:`use_numba` lets tests and the
benchmark flip it afterwards.
"""
import os

_FLAG = "SPECFRAME_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_enabled = HAVE_NUMBA and os.environ.get(_FLAG, "0").lower() not in ("1", "true", "yes")


def numba_enabled():
    return _enabled


def use_numba(flag):
    """Enable or disable the numba kernels; returns the previous setting."""
    global _enabled
    prev = _enabled
    _enabled = bool(flag) and HAVE_NUMBA
    return prev


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise."""
    kwargs.setdefault("cache", True)
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda f: f
