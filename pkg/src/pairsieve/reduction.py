"""Basis reduction and decoding: LLL, Babai's nearest plane, exact HKZ."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._backend import enum_cap
from .enumeration import EnumerationCapError, shortest
from .lattice import DegenerateBasisError, LatticeBasis, LatticePoint, Shift, gram_schmidt


@dataclass(frozen=True)
class ReductionConfig:
    delta: float = 0.99
    u: int | None = None
    mode: str = "HKZ-enum"
    max_dim: int | None = None

    def __post_init__(self):
        if not 0.25 < self.delta < 1:
            raise ValueError("delta must lie in (1/4, 1)")
        if self.u is not None and self.u < 2:
            raise ValueError("u must be at least 2")
        if self.mode not in ("LLL", "HKZ-enum"):
            raise ValueError(f"unknown reduction mode {self.mode!r}")

    def u_for(self, n: int) -> int:
        """Block parameter; defaults to n (the u = Theta(n) regime)."""
        return self.u if self.u is not None else max(2, n)


@dataclass(frozen=True, eq=False)
class ReducedBasis:
    """A reduced basis plus the unimodular ``transform`` with rows = transform @ input rows."""

    basis: LatticeBasis
    transform: np.ndarray

    def to_input_coeffs(self, coeffs):
        return np.asarray(coeffs, dtype=np.int64) @ self.transform


def lll_reduce(basis: LatticeBasis, delta: float = 0.99) -> ReducedBasis:
    gram_schmidt(basis)
    b = np.array(basis.prim, dtype=np.int64)
    u = np.eye(basis.rank, dtype=np.int64)
    if _kernels.lll_inplace(b, u, float(delta)) < 0:
        raise DegenerateBasisError("degenerate basis")
    return ReducedBasis(LatticeBasis(b * basis.content, basis.den), u)


def lambda1_estimate(basis: LatticeBasis, delta: float = 0.99) -> float:
    """|b_1| of an LLL-reduced basis: lambda_1 <= result <= 2^(n/2) lambda_1."""
    red = lll_reduce(basis, delta)
    first = red.basis.prim[0]
    return float(red.basis.scale) * float(np.sqrt(float(np.dot(first, first))))


def nearest_plane_coeffs(prim: np.ndarray, gs, target: np.ndarray, start: int = 0) -> np.ndarray:
    """Babai rounding along b*_k, ..., b*_{start+1} in primitive units.

    With ``start`` > 0 this decodes the projection orthogonal to the first
    ``start`` basis vectors; those coefficients are left at zero.
    """
    k = prim.shape[0]
    a = np.zeros(k, dtype=np.int64)
    resid = np.array(target, dtype=np.float64)
    for j in range(k - 1, start - 1, -1):
        c = np.dot(resid, gs.bstar[j]) / gs.bsq[j]
        a[j] = int(np.floor(c + 0.5))
        resid -= a[j] * prim[j]
    return a


def babai_nearest_plane(basis: LatticeBasis, t, reduce: bool = True) -> LatticePoint:
    """Lattice point near ``t``, returned as the point y - t of L - t.

    On the LLL-reduced basis the distance is within 2^(n/2) of optimal.
    """
    shift = Shift.of(t, basis.dim)
    red = lll_reduce(basis) if reduce else ReducedBasis(basis, np.eye(basis.rank, dtype=np.int64))
    rb = red.basis
    target = shift.array / float(rb.scale)
    a = nearest_plane_coeffs(rb.prim, rb.prim_gso, target)
    return LatticePoint(tuple(red.to_input_coeffs(a)), basis, shift)


def dist_estimate(basis: LatticeBasis, t) -> float:
    return babai_nearest_plane(basis, t).norm()


def complete_to_unimodular(a) -> np.ndarray:
    """Integer matrix with determinant +-1 whose first row is the primitive vector ``a``."""
    r = [int(v) for v in a]
    m = len(r)
    inv = [[int(i == j) for j in range(m)] for i in range(m)]
    while sum(1 for v in r if v != 0) > 1:
        p = min((i for i in range(m) if r[i] != 0), key=lambda i: abs(r[i]))
        for q in range(m):
            if q != p and r[q] != 0:
                f = r[q] // r[p]
                r[q] -= f * r[p]
                inv[p] = [x + f * y for x, y in zip(inv[p], inv[q])]
    p = next(i for i in range(m) if r[i] != 0)
    if abs(r[p]) != 1:
        raise ValueError("vector is not primitive")
    inv[0], inv[p] = inv[p], inv[0]
    r[0], r[p] = r[p], r[0]
    if r[0] < 0:
        inv[0] = [-x for x in inv[0]]
    return np.array(inv, dtype=np.int64)


def size_reduce(b: np.ndarray, u: np.ndarray) -> None:
    k = b.shape[0]
    for i in range(1, k):
        _, mu, _ = _kernels.gso(b.astype(np.float64))
        for j in range(i - 1, -1, -1):
            q = int(np.floor(mu[i, j] + 0.5))
            if q:
                b[i] -= q * b[j]
                u[i] -= q * u[j]
                mu[i, : j + 1] -= q * mu[j, : j + 1]


def hkz_reduce(basis: LatticeBasis, config: ReductionConfig | None = None) -> ReducedBasis:
    """Exact HKZ basis: each b*_i is a shortest vector of the i-th projected lattice.

    This is the gamma = 1 instance of the recursive gamma-reduced definition,
    obtained by enumeration on each projection.
    """
    config = config or ReductionConfig()
    cap = config.max_dim if config.max_dim is not None else enum_cap()
    if basis.rank > cap:
        raise EnumerationCapError(f"dimension {basis.rank} above enumeration cap {cap}")
    red = lll_reduce(basis, config.delta)
    if config.mode == "LLL":
        return red
    b = np.array(red.basis.prim, dtype=np.int64)
    u = np.array(red.transform, dtype=np.int64)
    k = b.shape[0]
    for i in range(k - 1):
        _, mu, bsq = _kernels.gso(b.astype(np.float64))
        mb, bb = mu[i:, i:], bsq[i:]
        a, val = shortest(mb, bb, np.zeros(len(bb)), bb[0], exclude_zero=True)
        if a is None or val >= bb[0] * (1 - 1e-12):
            continue
        w = complete_to_unimodular(a)
        b[i:] = w @ b[i:]
        u[i:] = w @ u[i:]
    size_reduce(b, u)
    return ReducedBasis(LatticeBasis(b * basis.content, basis.den), u)
