"""Exact lattice representation.

Lattice points are integer coefficient vectors relative to a basis whose rows
are the basis vectors; the ambient point of coefficients ``a`` under shift
``t`` is ``a @ B - t``. Rational bases are stored as an integer numerator with
one common denominator, so coefficient arithmetic (and in particular the
midpoint of two points in the same coset mod 2L) never leaves the lattice.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from pathlib import Path

import numpy as np

from . import _kernels

# Integer entries above this would lose exactness in the float64 kernels.
MAX_ENTRY = 2**40


class DegenerateBasisError(ValueError):
    pass


class BasisFormatError(ValueError):
    pass


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(repr(float(x)))
    return Fraction(str(x).strip())


def int_det(rows) -> int:
    """Exact determinant of a square integer matrix (Bareiss elimination)."""
    m = [[int(v) for v in r] for r in rows]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def int_rank(rows) -> int:
    """Exact rank of an integer matrix via fraction-free elimination."""
    m = [[Fraction(int(v)) for v in r] for r in rows]
    rank, cols = 0, len(m[0]) if m else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                f = m[i][c] / m[rank][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class GramSchmidt:
    bstar: np.ndarray
    mu: np.ndarray
    bsq: np.ndarray

    @property
    def norms(self) -> np.ndarray:
        return np.sqrt(self.bsq)

    @property
    def gs_norm(self) -> float:
        """max_i |b*_i|, the quantity bounding Klein sampler validity."""
        return float(self.norms.max()) if len(self.bsq) else 0.0

    def recompose(self) -> np.ndarray:
        return self.mu @ self.bstar

    def coords(self, x) -> np.ndarray:
        """Coordinates of ``x`` along each b*_j, divided by |b*_j|^2."""
        return (self.bstar @ np.asarray(x, dtype=np.float64)) / self.bsq


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """Rows of ``numer / den`` are the basis vectors b_1..b_k of L in R^n."""

    numer: np.ndarray
    den: int = 1

    def __post_init__(self):
        numer = np.array(self.numer, dtype=np.int64, ndmin=2, copy=True)
        if numer.shape[0] > numer.shape[1]:
            raise DegenerateBasisError("degenerate basis")
        if numer.size and np.abs(numer).max() >= MAX_ENTRY:
            raise ValueError("basis entries too large for exact float kernels")
        den = int(self.den)
        if den <= 0:
            raise ValueError("denominator must be positive")
        g = math.gcd(den, *[int(v) for v in numer.ravel()]) if numer.size else den
        numer = numer // g
        numer.setflags(write=False)
        object.__setattr__(self, "numer", numer)
        object.__setattr__(self, "den", den // g)

    @classmethod
    def from_rows(cls, rows) -> LatticeBasis:
        fr = [[_to_fraction(v) for v in r] for r in rows]
        den = reduce(math.lcm, (v.denominator for r in fr for v in r), 1)
        numer = [[int(v * den) for v in r] for r in fr]
        return cls(np.array(numer, dtype=np.int64, ndmin=2), den)

    @classmethod
    def from_columns(cls, cols) -> LatticeBasis:
        return cls.from_rows(list(map(list, zip(*cols))))

    @classmethod
    def identity(cls, n: int) -> LatticeBasis:
        return cls(np.eye(n, dtype=np.int64))

    @property
    def rank(self) -> int:
        return self.numer.shape[0]

    @property
    def dim(self) -> int:
        return self.numer.shape[1]

    @cached_property
    def content(self) -> int:
        return math.gcd(*[int(v) for v in self.numer.ravel()]) or 1

    @cached_property
    def prim(self) -> np.ndarray:
        """Primitive integer matrix; the basis equals ``scale * prim``."""
        p = self.numer // self.content
        p.setflags(write=False)
        return p

    @cached_property
    def scale(self) -> Fraction:
        return Fraction(self.content, self.den)

    @cached_property
    def matrix(self) -> np.ndarray:
        return self.numer / self.den

    def rows(self) -> list[list[Fraction]]:
        return [[Fraction(int(v), self.den) for v in r] for r in self.numer]

    @cached_property
    def gso(self) -> GramSchmidt:
        return gram_schmidt(self)

    @cached_property
    def prim_gso(self) -> GramSchmidt:
        bstar, mu, bsq = _kernels.gso(self.prim.astype(np.float64))
        return GramSchmidt(bstar, mu, bsq)

    def scaled(self, k) -> LatticeBasis:
        k = Fraction(k)
        return LatticeBasis(self.numer * k.numerator, self.den * k.denominator)

    def sub(self, k: int) -> LatticeBasis:
        """Sublattice spanned by the first ``k`` basis vectors."""
        return LatticeBasis(self.numer[:k], self.den)

    def __eq__(self, other):
        if not isinstance(other, LatticeBasis):
            return NotImplemented
        return self.den == other.den and np.array_equal(self.numer, other.numer)

    def __hash__(self):
        return hash((self.den, self.numer.tobytes(), self.numer.shape))

    def __repr__(self):
        return f"LatticeBasis(rank={self.rank}, dim={self.dim}, den={self.den})"


@dataclass(frozen=True)
class Shift:
    """Target/shift vector t, kept exact."""

    values: tuple[Fraction, ...]

    @classmethod
    def of(cls, t, n: int | None = None) -> Shift:
        if isinstance(t, Shift):
            sh = t
        elif t is None:
            if n is None:
                raise ValueError("need a dimension for a zero shift")
            sh = cls(tuple(Fraction(0) for _ in range(n)))
        else:
            sh = cls(tuple(_to_fraction(v) for v in t))
        if n is not None and len(sh.values) != n:
            raise ValueError(f"shift has length {len(sh.values)}, basis dimension is {n}")
        return sh

    @classmethod
    def zero(cls, n: int) -> Shift:
        return cls.of(None, n)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values], dtype=np.float64)

    @property
    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)

    def __len__(self):
        return len(self.values)

    def __add__(self, other: Shift) -> Shift:
        return Shift(tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: Shift) -> Shift:
        return Shift(tuple(a - b for a, b in zip(self.values, other.values)))

    def scaled(self, k) -> Shift:
        k = Fraction(k)
        return Shift(tuple(v * k for v in self.values))


def lattice_vector(basis: LatticeBasis, coeffs) -> Shift:
    """Exact ambient vector sum_i a_i b_i as a Shift-like tuple."""
    a = [int(v) for v in coeffs]
    vals = []
    for col in range(basis.dim):
        acc = sum(ai * int(basis.numer[i, col]) for i, ai in enumerate(a))
        vals.append(Fraction(acc, basis.den))
    return Shift(tuple(vals))


def exact_sq_norm(basis: LatticeBasis, shift: Shift, coeffs) -> Fraction:
    v = lattice_vector(basis, coeffs)
    return sum(((x - y) ** 2 for x, y in zip(v.values, shift.values)), Fraction(0))


@dataclass(frozen=True)
class CosetLabel:
    bits: tuple[int, ...]

    def __xor__(self, other: CosetLabel) -> CosetLabel:
        return CosetLabel(tuple(a ^ b for a, b in zip(self.bits, other.bits)))

    @property
    def code(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))

    @classmethod
    def from_code(cls, code: int, k: int) -> CosetLabel:
        return cls(tuple((code >> i) & 1 for i in range(k)))

    def __str__(self):
        return "".join(map(str, self.bits))

    @classmethod
    def parse(cls, text: str) -> CosetLabel:
        return cls(tuple(int(ch) for ch in text))


@dataclass(frozen=True)
class LatticePoint:
    """The point ``coeffs @ B - t`` of the shifted lattice L - t."""

    coeffs: tuple[int, ...]
    basis: LatticeBasis = field(repr=False)
    shift: Shift = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(v) for v in self.coeffs))
        if len(self.coeffs) != self.basis.rank:
            raise ValueError("coefficient vector length differs from basis rank")

    def to_ambient(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=np.float64) @ self.basis.matrix - self.shift.array

    def sq_norm(self) -> Fraction:
        return exact_sq_norm(self.basis, self.shift, self.coeffs)

    def norm(self) -> float:
        return fraction_sqrt(self.sq_norm())

    def label(self) -> CosetLabel:
        return coset_label(self)


def fraction_sqrt(q: Fraction) -> float:
    if q.denominator == 1:
        r = math.isqrt(q.numerator)
        if r * r == q.numerator:
            return float(r)
    return math.sqrt(q.numerator / q.denominator)


def gram_schmidt(basis: LatticeBasis) -> GramSchmidt:
    """Gram-Schmidt data of the rows, in float64."""
    bstar, mu, bsq = _kernels.gso(basis.matrix.astype(np.float64))
    scale = float(np.abs(basis.matrix).max()) if basis.matrix.size else 1.0
    if np.any(bsq <= (1e-12 * scale) ** 2) or int_rank(basis.numer) < basis.rank:
        raise DegenerateBasisError("degenerate basis")
    return GramSchmidt(bstar, mu, bsq)


def coset_label(p: LatticePoint) -> CosetLabel:
    return CosetLabel(tuple(v & 1 for v in p.coeffs))


def average(p: LatticePoint, q: LatticePoint) -> LatticePoint:
    if p.basis != q.basis or p.shift != q.shift:
        raise ValueError("points live in different shifted lattices")
    if coset_label(p) != coset_label(q):
        raise ValueError("not congruent mod 2L")
    return LatticePoint(tuple((a + b) // 2 for a, b in zip(p.coeffs, q.coeffs)), p.basis, p.shift)


def label_codes(coeffs: np.ndarray) -> np.ndarray:
    """Pack coefficient parities into integer codes (bit j = a_j mod 2)."""
    coeffs = np.asarray(coeffs, dtype=np.int64)
    if coeffs.ndim == 1:
        coeffs = coeffs[None, :]
    k = coeffs.shape[1]
    if k > 62:
        raise ValueError("coset codes support rank <= 62")
    weights = np.left_shift(np.int64(1), np.arange(k, dtype=np.int64))
    return (coeffs & 1) @ weights


@dataclass(frozen=True, eq=False)
class SampleList:
    """An ordered list of points of one shifted lattice, stored as coefficient rows."""

    coeffs: np.ndarray
    basis: LatticeBasis = field(repr=False)
    shift: Shift = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.int64, ndmin=2, copy=True)
        if c.size == 0 and self.basis.rank:
            c = np.zeros((0, self.basis.rank), dtype=np.int64)
        if c.shape[1] != self.basis.rank:
            raise ValueError("coefficient rows do not match basis rank")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __len__(self):
        return self.coeffs.shape[0]

    def __iter__(self):
        for row in self.coeffs:
            yield LatticePoint(tuple(row), self.basis, self.shift)

    def __getitem__(self, i) -> LatticePoint:
        return LatticePoint(tuple(self.coeffs[i]), self.basis, self.shift)

    @classmethod
    def of(cls, points: list[LatticePoint]) -> SampleList:
        if not points:
            raise ValueError("cannot infer context of an empty list")
        return cls(np.array([p.coeffs for p in points]), points[0].basis, points[0].shift)

    def with_coeffs(self, coeffs) -> SampleList:
        return SampleList(coeffs, self.basis, self.shift)

    def codes(self) -> np.ndarray:
        return label_codes(self.coeffs) if len(self) else np.zeros(0, dtype=np.int64)

    def ambient(self) -> np.ndarray:
        return self.coeffs.astype(np.float64) @ self.basis.matrix - self.shift.array

    def norms(self) -> np.ndarray:
        if not len(self):
            return np.zeros(0)
        return np.linalg.norm(self.ambient(), axis=1)


def gen_random_lattice(n: int, style: str = "uniform-integer", seed: int = 0) -> LatticeBasis:
    """Deterministic full-rank integer basis.

    ``uniform-integer`` draws entries uniformly from [-10, 10]; ``knapsack``
    builds the Goldstein-Mayer style basis {(N, 0, ..., 0), (x_i, e_i)} with a
    random modulus N of about 3n bits (at most 30).
    """
    if n < 1:
        raise ValueError("dimension must be positive")
    rng = np.random.default_rng(seed)
    if style == "uniform-integer":
        while True:
            m = rng.integers(-10, 11, size=(n, n))
            if int_det(m) != 0:
                return LatticeBasis(m)
    if style == "knapsack":
        bits = min(30, max(4, 3 * n))
        big = int(rng.integers(2 ** (bits - 1), 2**bits))
        m = np.zeros((n, n), dtype=np.int64)
        m[0, 0] = big
        for i in range(1, n):
            m[i, 0] = int(rng.integers(0, big))
            m[i, i] = 1
        return LatticeBasis(m)
    raise ValueError(f"unknown lattice style {style!r}")


def _parse_rows(lines: list[str]):
    if not lines:
        raise BasisFormatError("empty basis file")
    try:
        n = int(lines[0].split()[0])
    except (ValueError, IndexError) as exc:
        raise BasisFormatError("first line must hold the dimension") from exc
    rows = [ln.split() for ln in lines[1:]]
    if n < 1 or len(rows) != n or any(len(r) != n for r in rows):
        raise BasisFormatError(f"expected {n} rows of {n} entries")
    try:
        return [[Fraction(v) for v in r] for r in rows]
    except (ValueError, ZeroDivisionError) as exc:
        raise BasisFormatError(f"bad entry: {exc}") from exc


def parse_basis(source) -> tuple[LatticeBasis, Shift | None]:
    """Read a basis (and optional target) from a path or a text blob.

    The plain format is ``n`` then ``n`` rows of ``n`` rationals; the JSON
    format is ``{"dim": n, "basis": [[...]], "target": [...]}``.
    """
    text = source
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
        text = Path(source).read_text()
    stripped = text.strip()
    target = None
    if stripped.startswith("{"):
        try:
            doc = json.loads(stripped)
            n = int(doc["dim"])
            rows = [[_to_fraction(v) for v in r] for r in doc["basis"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise BasisFormatError(f"malformed JSON basis: {exc}") from exc
        if len(rows) != n or any(len(r) != n for r in rows):
            raise BasisFormatError(f"expected {n} rows of {n} entries")
        if doc.get("target") is not None:
            if len(doc["target"]) != n:
                raise BasisFormatError("dimension mismatch between basis and target")
            target = Shift.of(doc["target"])
    else:
        rows = _parse_rows([ln for ln in stripped.splitlines() if ln.strip() and not ln.lstrip().startswith("#")])
    basis = LatticeBasis.from_rows(rows)
    if int_rank(basis.numer) < basis.rank:
        raise DegenerateBasisError("degenerate basis")
    return basis, target


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def serialize_basis(basis: LatticeBasis, fmt: str = "text", target: Shift | None = None) -> str:
    rows = basis.rows()
    if fmt == "json":
        doc = {"dim": basis.dim, "basis": [[_fmt(v) if v.denominator != 1 else int(v) for v in r] for r in rows]}
        if target is not None:
            doc["target"] = [_fmt(v) if v.denominator != 1 else int(v) for v in target.values]
        return json.dumps(doc)
    if basis.rank != basis.dim:
        raise ValueError("text format holds square bases only")
    lines = [str(basis.dim)] + [" ".join(_fmt(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"
