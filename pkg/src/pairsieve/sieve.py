"""Pair-and-average sieving, rejection hooks, and the shifted-sublattice start."""
from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from . import _kernels
from .gaussian import CosetMassTable, coset_masses, klein_coeffs, mass_truncated
from .lattice import LatticeBasis, SampleList, Shift, lattice_vector
from .reduction import ReducedBasis, ReductionConfig, dist_estimate, hkz_reduce, nearest_plane_coeffs


class InvalidRejectionError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class RejectionFn(Protocol):
    def __call__(self, codes: np.ndarray, step: int, rng: np.random.Generator) -> np.ndarray: ...


@dataclass(frozen=True)
class SieveConfig:
    ell: int
    M: int
    kappa: float = 8.0
    seed: int | None = None

    def __post_init__(self):
        if self.ell < 0 or self.M < 0:
            raise ValueError("ell and M must be nonnegative")
        if self.kappa < 1:
            raise ValueError("kappa must be at least 1")


def pair_and_average(samples: SampleList) -> SampleList:
    """Average consecutive same-coset points; odd leftovers per coset are dropped."""
    if len(samples) < 2:
        return samples.with_coeffs(np.zeros((0, samples.basis.rank), dtype=np.int64))
    first, second = _kernels.pair_indices(samples.codes(), samples.basis.rank)
    c = samples.coeffs
    return samples.with_coeffs((c[first] + c[second]) // 2)


def trivial_rejection(codes: np.ndarray, step: int, rng: np.random.Generator) -> np.ndarray:
    return np.arange(len(codes), dtype=np.int64)


def reject_all(codes: np.ndarray, step: int, rng: np.random.Generator) -> np.ndarray:
    return np.zeros(0, dtype=np.int64)


class SquareSamplerRejection:
    """Label-only rejection that realizes the squared coset distribution at each step.

    Step ``i`` draws M' = ceil(M p_col / (32 kappa p_max)) labels from
    p_c^2 / p_col (using ``tables[i]``) and accepts, per drawn label, the
    next two unused indices carrying it. The list is truncated at the first
    label that cannot be served.
    """

    def __init__(self, tables: list[CosetMassTable], kappa: float = 1.0):
        if kappa < 1:
            raise ValueError("kappa must be at least 1")
        self.tables = list(tables)
        self.kappa = kappa

    def target_pairs(self, m: int, step: int) -> int:
        tab = self.tables[step]
        return math.ceil(m * tab.p_col / (32 * self.kappa * tab.p_max)) if m else 0

    def __call__(self, codes: np.ndarray, step: int, rng: np.random.Generator) -> np.ndarray:
        tab = self.tables[step]
        labels = rng.choice(len(tab.values), size=self.target_pairs(len(codes), step), p=tab.squared_probs)
        queues: dict[int, list[int]] = {}
        for i, c in enumerate(codes.tolist()):
            queues.setdefault(c, []).append(i)
        pos = dict.fromkeys(queues, 0)
        out = []
        for c in labels.tolist():
            q = queues.get(c)
            if q is None or pos[c] + 2 > len(q):
                break
            out.extend(q[pos[c]: pos[c] + 2])
            pos[c] += 2
        return np.array(out, dtype=np.int64)


def histogram_digest(codes: np.ndarray) -> str:
    vals, counts = np.unique(codes, return_counts=True)
    text = ";".join(f"{v}:{c}" for v, c in zip(vals.tolist(), counts.tolist()))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _validated(idx, m: int) -> np.ndarray:
    idx = np.asarray(idx)
    if idx.size == 0:
        return np.zeros(0, dtype=np.int64)
    if idx.ndim != 1 or not np.issubdtype(idx.dtype, np.integer):
        raise InvalidRejectionError("invalid rejection function")
    if idx.min() < 0 or idx.max() >= m or len(np.unique(idx)) != len(idx):
        raise InvalidRejectionError("invalid rejection function")
    return idx.astype(np.int64)


def reject_and_average(samples: SampleList, ell: int, f: RejectionFn, rng: np.random.Generator,
                       trace: Callable[[dict], None] | None = None) -> SampleList:
    """``ell`` rounds of: labels -> accepted indices f(labels) -> pair_and_average.

    Accepted points keep the order in which ``f`` lists them.
    """
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    cur = samples
    for step in range(ell):
        codes = cur.codes()
        idx = _validated(f(codes, step, rng), len(cur))
        nxt = pair_and_average(cur.with_coeffs(cur.coeffs[idx]))
        if trace is not None:
            norms = nxt.norms()
            trace({"step": step + 1, "M_in": len(cur), "M_out": len(nxt),
                   "min_norm": float(norms.min()) if len(norms) else None,
                   "coset_histogram_digest": histogram_digest(nxt.codes())})
        cur = nxt
    return cur


@dataclass(frozen=True, eq=False)
class StartOutput:
    """Samples of D_{L' - y - t, s_hat} over the sublattice L' spanned by ``sublattice``.

    ``embed`` maps sublattice coefficients to input-basis coefficients and
    ``offset`` holds the input-basis coefficients of -y.
    """

    sublattice: LatticeBasis
    y: Shift
    samples: SampleList
    s_hat: float
    embed: np.ndarray
    offset: np.ndarray

    def to_input_coeffs(self, coeffs) -> np.ndarray:
        c = np.asarray(coeffs, dtype=np.int64)
        return c @ self.embed + self.offset


def _log_n(n: int) -> float:
    return math.log2(max(n, 2))


def start_radius(s_hat: float, n: int) -> float:
    return 10 * s_hat / math.sqrt(_log_n(n))


def start_threshold(n: int, u: int, dist: float) -> float:
    """Smallest s_hat the start guarantee asks for: 10 sqrt(n log n) u^(2n/u) dist."""
    return 10 * math.sqrt(n * _log_n(n)) * u ** (2 * n / u) * dist


def _check_start(basis: LatticeBasis, shift: Shift, u: int, s_hat: float, mode: str) -> None:
    if mode == "off" or shift.is_zero:
        return
    n = basis.rank
    d_hat = dist_estimate(basis, shift)
    if s_hat >= start_threshold(n, u, d_hat):
        return
    if s_hat >= start_threshold(n, u, d_hat / 2 ** (n / 2)):
        warnings.warn("s_hat is certified only by the lower end of the distance estimate", stacklevel=3)
        return
    msg = f"s_hat={s_hat:.4g} below start threshold for the estimated distance"
    if mode == "error":
        raise PreconditionError(msg)
    warnings.warn(msg, stacklevel=3)


def prepare_start(basis: LatticeBasis, t, M: int, u: int | None, s_hat: float, rng: np.random.Generator,
                  check: str = "error", reduced: ReducedBasis | None = None, exact: bool = False) -> StartOutput:
    """Reduce, keep the prefix with |b*_i| <= r = 10 s_hat / sqrt(log n), decode the rest, sample."""
    if check not in ("error", "warn", "off"):
        raise ValueError(f"unknown check mode {check!r}")
    shift = Shift.of(t, basis.dim)
    n = basis.rank
    u = ReductionConfig(u=u).u_for(n)
    _check_start(basis, shift, u, s_hat, check)
    red = reduced if reduced is not None else hkz_reduce(basis, ReductionConfig(u=u))
    rb = red.basis
    r = start_radius(s_hat, n)
    norms = rb.gso.norms
    k = 0
    while k < n and norms[k] <= r:
        k += 1
    tail = np.zeros(n, dtype=np.int64)
    if k < n and not shift.is_zero:
        scale = float(rb.scale)
        gs = rb.prim_gso
        tail = nearest_plane_coeffs(rb.prim, gs, shift.array / scale, start=k)
    offset = red.to_input_coeffs(tail)
    minus_y = lattice_vector(basis, offset)
    sub = rb.sub(k)
    sub_shift = shift - minus_y
    coeffs = klein_coeffs(sub, sub_shift, s_hat, rng, M, exact)
    embed = red.transform[:k]
    return StartOutput(sub, Shift(tuple(-v for v in minus_y.values)), SampleList(coeffs, sub, sub_shift),
                       float(s_hat), embed, offset)


def required_M(table: CosetMassTable, ell: int, kappa: float) -> int:
    """(10 kappa)^(2 ell) rho_s(L - t) / max_c rho_s(2L + c - t)."""
    return math.ceil((10 * kappa) ** (2 * ell) / table.p_max)


def loss_factors(basis: LatticeBasis, t, s: float, ell: int, eps_rel: float = 1e-9) -> list[float]:
    """Per-step ratios rho_{s'}(L-t) rho_{s'}(L) / (rho_{s_i}(L-t) max_c rho_{s_i}(2L+c-t)), s' = s_i/sqrt 2."""
    zero = Shift.zero(basis.dim)
    out = []
    for i in range(ell):
        si, sn = s / 2 ** (i / 2), s / 2 ** ((i + 1) / 2)
        tab = coset_masses(basis, t, si, eps_rel)
        out.append(mass_truncated(basis, t, sn, eps_rel).value * mass_truncated(basis, zero, sn, eps_rel).value
                   / (tab.total * tab.values.max()))
    return out


def loss_product_bound(basis: LatticeBasis, t, s: float, ell: int, eps_rel: float = 1e-9) -> tuple[float, float]:
    """Both sides of the telescoped lower bound on the product of ``loss_factors``."""
    lhs = float(np.prod(loss_factors(basis, t, s, ell, eps_rel)))
    top = coset_masses(basis, t, s / 2 ** (ell / 2), eps_rel)
    base = coset_masses(basis, t, s, eps_rel)
    rhs = (top.total / top.values.max()) * (base.values.max() / base.total)
    return lhs, rhs


def predicted_M_prime(basis: LatticeBasis, t, s: float, ell: int, kappa: float, M: int,
                      eps_rel: float = 1e-9) -> int:
    if ell == 0:
        return M
    prod = float(np.prod(loss_factors(basis, t, s, ell, eps_rel)))
    return math.ceil(M / (32 * kappa) ** ell * prod)
