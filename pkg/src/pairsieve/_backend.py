"""Kernel backend selection.

Hot loops are written once as plain Python over numpy arrays. When numba is
importable and ``PAIRSIEVE_BACKEND`` is not ``numpy``, they are compiled with
``@njit``; otherwise the interpreted versions (or a vectorized numpy variant,
where one exists) are used.
"""
import os

_requested = os.environ.get("PAIRSIEVE_BACKEND", "numba").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = _numba is not None and _requested != "numpy"
BACKEND = "numba" if USE_NUMBA else "numpy"


def maybe_njit(fn):
    """Compile ``fn`` with numba when the numba backend is active."""
    if USE_NUMBA:
        return _numba.njit(cache=True, nogil=True)(fn)
    return fn


def enum_cap(default=20):
    """Largest dimension handed to enumeration; ``GSL_ENUM_CAP`` overrides."""
    raw = os.environ.get("GSL_ENUM_CAP")
    return int(raw) if raw else default
