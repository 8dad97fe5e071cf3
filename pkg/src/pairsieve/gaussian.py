"""Gaussian masses over shifted lattices and discrete Gaussian samplers."""
from __future__ import annotations

import json
import math
import warnings
from fractions import Fraction
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import _kernels
from .enumeration import DEFAULT_POINT_CAP, EnumerationCapError, points_within, shortest
from .lattice import CosetLabel, LatticeBasis, LatticePoint, SampleList, Shift, lattice_vector
from .reduction import ReducedBasis, lll_reduce, nearest_plane_coeffs

DEFAULT_EPS = 1e-9
MAX_COSET_RANK = 14
# Validity constant C in s > C * sqrt(log n) * max|b*_i|; chosen conservatively.
KLEIN_C = 10.0


class SamplerParameterWarning(UserWarning):
    pass


def rho(x, s: float):
    """Gaussian mass exp(-pi |x|^2 / s^2) along the last axis."""
    if s <= 0:
        raise ValueError("Gaussian parameter must be positive")
    x = np.asarray(x, dtype=np.float64)
    sq = np.sum(x * x, axis=-1) if x.ndim else x * x
    return np.exp(-math.pi * sq / (s * s))


class MassValue(NamedTuple):
    value: float
    error_bound: float


@lru_cache(maxsize=256)
def _reduced_prim(key: bytes, shape: tuple[int, int]) -> ReducedBasis:
    prim = np.frombuffer(key, dtype=np.int64).reshape(shape)
    return lll_reduce(LatticeBasis(prim))


def reduced_context(basis: LatticeBasis) -> tuple[ReducedBasis, LatticeBasis]:
    """LLL reduction of the primitive part, shared by every multiple of the lattice.

    Returns the reduction (in primitive units) and the reduced basis at the
    original scale.
    """
    red = _reduced_prim(basis.prim.tobytes(), basis.prim.shape)
    return red, LatticeBasis(red.basis.numer * basis.content, basis.den)


def tail_probability(k: int, y2: float) -> float:
    """Banaszczyk-type tail (2e)^(k/2+1) exp(-pi y^2 / 2) for Pr[|X| > r]."""
    return (2 * math.e) ** (k / 2 + 1) * math.exp(-math.pi * y2 / 2)


def _support(basis: LatticeBasis, shift: Shift, s: float, eps_rel: float, point_cap: int):
    """Enumerate every point of L - t whose omission could matter at relative level eps_rel.

    The radius r is the smallest one meeting the validity conditions of the
    tail bound with (2e)^(k/2+1) exp(-pi y^2/2) <= eps_rel / (1 + eps_rel),
    y^2 = (r^2 - dist^2) / s^2, with everything measured inside span(L).
    """
    red, _ = reduced_context(basis)
    rb = red.basis
    scale = float(basis.scale)
    gs = rb.prim_gso
    k = rb.rank
    tp = shift.array / scale
    sp = s / scale
    tc = gs.coords(tp) if k else np.zeros(0)
    tpar = tc @ gs.bstar if k else np.zeros_like(tp)
    tperp2 = float(np.dot(tp - tpar, tp - tpar))
    if k == 0:
        return red, np.zeros((1, 0), dtype=np.int64), np.zeros(1), tperp2, sp, 0.0
    guess = nearest_plane_coeffs(rb.prim, gs, tp)
    g_par = guess @ rb.prim - tpar
    _, d2 = shortest(gs.mu, gs.bsq, tc, float(np.dot(g_par, g_par)), exclude_zero=False)
    target = eps_rel / (1 + eps_rel) * (1 - 1e-6)  # strict after rounding
    y2 = (2 / math.pi) * ((k / 2 + 1) * math.log(2 * math.e) - math.log(target))
    r2 = d2 + y2 * sp * sp
    r2 = max(r2, k / (2 * math.pi) * sp * sp * (1 + 1e-9), d2 * (1 + 1e-9))
    if d2 > 0:
        r2 = max(r2, (d2 + k * sp * sp / math.pi * math.log(2 * math.pi * d2 / (k * sp * sp))) * (1 + 1e-9))
    p_tail = tail_probability(k, (r2 - d2) / (sp * sp))
    coeffs, sq = points_within(gs.mu, gs.bsq, tc, r2, point_cap)
    keep = sq <= r2
    return red, coeffs[keep], sq[keep], tperp2, sp, p_tail


def mass_truncated(basis: LatticeBasis, t, s: float, eps_rel: float = DEFAULT_EPS,
                   point_cap: int = DEFAULT_POINT_CAP) -> MassValue:
    """rho_s(L - t) from enumeration, with a certified bound on the neglected tail."""
    shift = Shift.of(t, basis.dim)
    _, _, sq, tperp2, sp, p_tail = _support(basis, shift, s, eps_rel, point_cap)
    value = math.exp(-math.pi * tperp2 / (sp * sp)) * float(np.sum(np.exp(-math.pi * sq / (sp * sp))))
    return MassValue(value, value * p_tail / (1 - p_tail))


def support_points(basis: LatticeBasis, t, s: float, eps_rel: float = DEFAULT_EPS,
                   point_cap: int = DEFAULT_POINT_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient rows (in ``basis`` coordinates) and masses rho_s(y - t) of the enumerated support."""
    shift = Shift.of(t, basis.dim)
    red, coeffs, sq, tperp2, sp, _ = _support(basis, shift, s, eps_rel, point_cap)
    masses = np.exp(-math.pi * (sq + tperp2) / (sp * sp))
    return red.to_input_coeffs(coeffs), masses


@dataclass(frozen=True, eq=False)
class CosetMassTable:
    """Masses rho_s(2L + c - t) for every coset c of L/2L, indexed by label code."""

    s: float
    rank: int
    values: np.ndarray
    eps: float

    @property
    def total(self) -> float:
        return float(self.values.sum())

    @property
    def probs(self) -> np.ndarray:
        return self.values / self.total

    @property
    def p_max(self) -> float:
        return float(self.probs.max())

    @property
    def p_col(self) -> float:
        return float(np.sum(self.probs ** 2))

    @property
    def squared_probs(self) -> np.ndarray:
        sq = self.values ** 2
        return sq / sq.sum()

    @property
    def masses(self) -> dict[str, float]:
        return {str(CosetLabel.from_code(c, self.rank)): float(v) for c, v in enumerate(self.values)}

    def mass(self, label: CosetLabel) -> float:
        return float(self.values[label.code])

    def to_json(self) -> str:
        return json.dumps({"s": self.s, "masses": self.masses, "eps": self.eps, "total": self.total,
                           "p_max": self.p_max, "p_col": self.p_col})

    @classmethod
    def from_json(cls, text: str) -> CosetMassTable:
        doc = json.loads(text)
        masses = doc["masses"]
        k = len(next(iter(masses)))
        values = np.zeros(2**k)
        for key, v in masses.items():
            values[CosetLabel.parse(key).code] = v
        return cls(float(doc["s"]), k, values, float(doc["eps"]))


def coset_shift(basis: LatticeBasis, shift: Shift, code: int) -> Shift:
    """The shift t - sum c_i b_i under which 2L + c - t becomes 2L - (t - c)."""
    c = CosetLabel.from_code(code, basis.rank).bits
    return shift - lattice_vector(basis, c)


def coset_masses(basis: LatticeBasis, t, s: float, eps_rel: float = DEFAULT_EPS,
                 max_rank: int = MAX_COSET_RANK) -> CosetMassTable:
    """Masses of all 2^k cosets of 2L in L - t (labels in ``basis`` coordinates)."""
    if basis.rank > max_rank:
        raise EnumerationCapError(f"2^{basis.rank} cosets exceed the configured cap")
    shift = Shift.of(t, basis.dim)
    double = basis.scaled(2)
    values = np.array([mass_truncated(double, coset_shift(basis, shift, c), s, eps_rel).value
                       for c in range(2**basis.rank)])
    return CosetMassTable(float(s), basis.rank, values, eps_rel)


def _check_parameter(basis: LatticeBasis, s: float) -> None:
    n = max(basis.rank, 2)
    bound = KLEIN_C * math.sqrt(math.log2(n)) * basis.gso.gs_norm
    if s <= bound:
        warnings.warn(f"s={s:.4g} is below the Klein validity threshold {bound:.4g}; "
                      "output is only statistically certified", SamplerParameterWarning, stacklevel=3)


def klein_coeffs(basis: LatticeBasis, shift: Shift, s: float, rng: np.random.Generator, m: int,
                 exact: bool = False, max_proposals: int = 10**8) -> np.ndarray:
    """``m`` coefficient rows of D_{L - t, s} by nested sampling along b*_k, ..., b*_1.

    With ``exact`` every proposal is accepted with probability
    prod_j rho(Z - c_j) / rho(Z), which removes the bias of plain nested
    sampling at small parameters.
    """
    k = basis.rank
    if m == 0 or k == 0:
        return np.zeros((m, k), dtype=np.int64)
    gs = basis.prim_gso
    scale = float(basis.scale)
    tc = gs.coords(shift.array / scale)
    sp = s / scale
    if not exact or not np.any(np.tril(gs.mu, -1)):
        # with orthogonal rows the nested draws are independent and already exact
        out, _ = _kernels.klein_batch(gs.mu, gs.bsq, tc, sp, rng.random((m, k)))
        return out
    chunks, have, proposed = [], 0, 0
    while have < m:
        batch = max(64, 2 * (m - have))
        out, logacc = _kernels.klein_batch(gs.mu, gs.bsq, tc, sp, rng.random((batch, k)))
        keep = out[np.log(rng.random(batch)) < logacc][: m - have]
        chunks.append(keep)
        have += len(keep)
        proposed += batch
        if proposed > max_proposals and have < m:
            raise RuntimeError("exact Klein sampler acceptance too low at this parameter")
    return np.concatenate(chunks)


def klein_sample(basis: LatticeBasis, t, s: float, rng: np.random.Generator, size: int | None = None,
                 exact: bool = False, check: bool = True):
    """Sample(s) from D_{L - t, s}; a LatticePoint, or a SampleList when ``size`` is given."""
    if s <= 0:
        raise ValueError("Gaussian parameter must be positive")
    shift = Shift.of(t, basis.dim)
    if check:
        _check_parameter(basis, s)
    coeffs = klein_coeffs(basis, shift, s, rng, 1 if size is None else size, exact)
    if size is None:
        return LatticePoint(tuple(coeffs[0]), basis, shift)
    return SampleList(coeffs, basis, shift)


def coset_coeffs(basis: LatticeBasis, shift: Shift, s: float, code: int, rng: np.random.Generator,
                 m: int, exact: bool = True) -> np.ndarray:
    """``m`` coefficient rows from D_{2L + c - t, s}: x = 2w + c, w ~ D_{L - (t - c)/2, s/2}."""
    bits = np.array(CosetLabel.from_code(code, basis.rank).bits, dtype=np.int64)
    half = coset_shift(basis, shift, code).scaled(Fraction(1, 2))
    w = klein_coeffs(basis, half, s / 2, rng, m, exact)
    return 2 * w + bits


def squared_coset_sampler(table: CosetMassTable, m_pairs: int, basis: LatticeBasis, t,
                          rng: np.random.Generator, exact: bool = True) -> SampleList:
    """``m_pairs`` coset-equal pairs with Pr[c] = p_c^2 / p_col, listed as (x_1, x_2, x_3, ...).

    Averaging each consecutive pair gives independent samples of D_{L - t, s/sqrt 2}.
    """
    shift = Shift.of(t, basis.dim)
    if table.rank != basis.rank:
        raise ValueError("table rank differs from basis rank")
    labels = rng.choice(len(table.values), size=m_pairs, p=table.squared_probs)
    out = np.zeros((2 * m_pairs, basis.rank), dtype=np.int64)
    for code in np.unique(labels):
        where = np.flatnonzero(labels == code)
        pts = coset_coeffs(basis, shift, table.s, int(code), rng, 2 * len(where), exact)
        out[2 * where] = pts[0::2]
        out[2 * where + 1] = pts[1::2]
    return SampleList(out, basis, shift)
