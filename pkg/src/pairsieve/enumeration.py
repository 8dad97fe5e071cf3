"""Fincke-Pohst style enumeration over Gram-Schmidt data."""
import numpy as np

from . import _kernels
from ._backend import enum_cap


class EnumerationCapError(RuntimeError):
    pass


DEFAULT_POINT_CAP = 2_000_000


def check_dim(k: int, cap: int | None = None) -> None:
    cap = enum_cap() if cap is None else cap
    if k > cap:
        raise EnumerationCapError(f"dimension {k} above enumeration cap {cap}")


def points_within(mu, bsq, tc, r2, point_cap=DEFAULT_POINT_CAP):
    """All coefficient vectors whose in-span squared distance to ``tc`` is <= r2.

    Returns ``(coeffs, sq)`` with one row per point (slightly padded radius;
    filter ``sq`` when an exact boundary matters).
    """
    k = len(bsq)
    size = min(point_cap, 4096)
    while True:
        out = np.zeros((size, k), dtype=np.int64)
        sq = np.zeros(size)
        count = _kernels.enum_collect(np.asarray(mu, np.float64), np.asarray(bsq, np.float64),
                                      np.asarray(tc, np.float64), float(r2), size, out, sq)
        if count >= 0:
            return out[:count], sq[:count]
        if size >= point_cap:
            raise EnumerationCapError(f"more than {point_cap} lattice points within radius")
        size = min(point_cap, size * 8)


def shortest(mu, bsq, tc, r2, exclude_zero):
    """Minimizer of the in-span squared distance within r2, or ``(None, inf)``."""
    k = len(bsq)
    best = np.zeros(k, dtype=np.int64)
    val = _kernels.enum_min(np.asarray(mu, np.float64), np.asarray(bsq, np.float64),
                            np.asarray(tc, np.float64), float(r2), bool(exclude_zero), best)
    if val < 0:
        return None, float("inf")
    return best, float(val)
