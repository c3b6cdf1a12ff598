"""JIT switch for the hot kernels.

Set ``R22SDF_DISABLE_JIT=1`` to run every kernel through the pure
Python/numpy path. Numba being absent has the same effect.
"""
import os

_flag = os.environ.get("R22SDF_DISABLE_JIT", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USE_NUMBA = numba is not None and _flag not in ("1", "true", "yes", "on")


def jit(fn):
    """``numba.njit`` when enabled, identity otherwise."""
    if USE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


def force_jit(fn):
    """Always compile (used by the benchmark to compare both paths)."""
    if numba is None:  # pragma: no cover
        raise RuntimeError("numba is not installed")
    return numba.njit(cache=True)(fn)
