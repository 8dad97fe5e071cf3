"""Ground-truth oracles and statistical checks for samplers, identities and sieves."""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from .enumeration import check_dim, points_within, shortest
from .gaussian import (
    DEFAULT_EPS,
    coset_coeffs,
    coset_masses,
    klein_coeffs,
    mass_truncated,
    reduced_context,
    squared_coset_sampler,
    support_points,
    tail_probability,
)
from .lattice import (
    CosetLabel,
    LatticeBasis,
    LatticePoint,
    SampleList,
    Shift,
    exact_sq_norm,
    fraction_sqrt,
    label_codes,
    lattice_vector,
)
from .reduction import lll_reduce, nearest_plane_coeffs
from .sieve import SquareSamplerRejection, loss_product_bound, reject_and_average, trivial_rejection
from .solvers import SVP_WINDOW

ALPHA = 1e-3


# ---------------------------------------------------------------- oracles

def _svp_key(basis: LatticeBasis, coeffs) -> tuple:
    c = [int(v) for v in coeffs]
    lead = next(v for v in c if v != 0)
    canon = tuple(v if lead > 0 else -v for v in c)
    return exact_sq_norm(basis, Shift.zero(basis.dim), canon), tuple(-v for v in canon), canon


def _cvp_key(basis: LatticeBasis, shift: Shift, coeffs) -> tuple:
    c = tuple(int(v) for v in coeffs)
    return exact_sq_norm(basis, shift, c), c, c


def enum_svp(basis: LatticeBasis) -> tuple[float, LatticePoint]:
    """Exact lambda_1 and its witness (first nonzero coefficient positive, then lexicographically largest)."""
    check_dim(basis.rank)
    red = lll_reduce(basis)
    gs = red.basis.prim_gso
    zero = np.zeros(basis.rank)
    _, val = shortest(gs.mu, gs.bsq, zero, gs.bsq[0], exclude_zero=True)
    coeffs, _ = points_within(gs.mu, gs.bsq, zero, val * (1 + 1e-9))
    coeffs = red.to_input_coeffs(coeffs[np.any(coeffs != 0, axis=1)])
    key = min(_svp_key(basis, c) for c in coeffs)
    return fraction_sqrt(key[0]), LatticePoint(key[2], basis, Shift.zero(basis.dim))


def enum_cvp(basis: LatticeBasis, t) -> tuple[float, LatticePoint]:
    """Exact dist(t, L) and the witness y - t with lexicographically smallest coefficients."""
    check_dim(basis.rank)
    shift = Shift.of(t, basis.dim)
    red = lll_reduce(basis)
    rb = red.basis
    gs = rb.prim_gso
    tp = shift.array / float(rb.scale)
    tc = gs.coords(tp)
    tpar = tc @ gs.bstar
    guess = nearest_plane_coeffs(rb.prim, gs, tp) @ rb.prim - tpar
    _, val = shortest(gs.mu, gs.bsq, tc, float(guess @ guess), exclude_zero=False)
    coeffs, _ = points_within(gs.mu, gs.bsq, tc, val * (1 + 1e-9) + 1e-12)
    key = min(_cvp_key(basis, shift, c) for c in red.to_input_coeffs(coeffs))
    return fraction_sqrt(key[0]), LatticePoint(key[2], basis, shift)


def _box(bounds, chunk=1 << 18):
    ranges = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
    total = math.prod(len(r) for r in ranges)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        cols = []
        for r in reversed(ranges):
            cols.append(r[idx % len(r)])
            idx = idx // len(r)
        yield np.stack(cols[::-1], axis=1)


def _box_min(basis, shift, bounds, nonzero, keyfn):
    best = None
    for block in _box(bounds):
        if nonzero:
            block = block[np.any(block != 0, axis=1)]
        pts = block.astype(np.float64) @ basis.matrix - shift.array
        sq = np.einsum("ij,ij->i", pts, pts)
        near = np.flatnonzero(sq <= sq.min() * (1 + 1e-9) + 1e-12)
        cand = min(keyfn(block[i]) for i in near)
        best = cand if best is None or cand[:2] < best[:2] else best
    return best


def _dual_norms(basis: LatticeBasis) -> np.ndarray:
    b = basis.matrix
    dual = np.linalg.solve(b @ b.T, b)
    return np.linalg.norm(dual, axis=1)


def box_search(basis: LatticeBasis, t=None, radius: int = 3, max_points: int = 50_000_000):
    """Exhaustive search over coefficient boxes, widened until provably complete.

    A box of radius 3 gives a candidate of length R; every better vector x
    has |a_i| = |<x, d_i>| <= R |d_i| with d_i the dual basis, so the box is
    widened to those bounds whenever they exceed it.
    """
    svp = t is None
    shift = Shift.zero(basis.dim) if svp else Shift.of(t, basis.dim)
    keyfn = (lambda c: _svp_key(basis, c)) if svp else (lambda c: _cvp_key(basis, shift, c))
    bounds = [radius] * basis.rank
    best = _box_min(basis, shift, bounds, svp, keyfn)
    reach = fraction_sqrt(best[0]) + (0.0 if svp else float(np.linalg.norm(shift.array)))
    need = [int(math.floor(reach * d * (1 + 1e-9) + 1e-9)) for d in _dual_norms(basis)]
    if any(n > b for n, b in zip(need, bounds)):
        bounds = [max(n, b) for n, b in zip(need, bounds)]
        if math.prod(2 * b + 1 for b in bounds) > max_points:
            raise RuntimeError("box search too large")
        best = _box_min(basis, shift, bounds, svp, keyfn)
    return fraction_sqrt(best[0]), LatticePoint(best[2], basis, shift)


# ---------------------------------------------------------------- distributions

def exact_dgs_pmf(basis: LatticeBasis, t, s: float, support_eps: float = DEFAULT_EPS) -> dict[tuple, float]:
    """Probabilities of D_{L - t, s} on its enumerated support, keyed by coefficient tuple."""
    coeffs, masses = support_points(basis, t, s, support_eps)
    total = mass_truncated(basis, t, s, support_eps).value
    return {tuple(int(v) for v in c): float(m / total) for c, m in zip(coeffs, masses)}


@dataclass
class EmpiricalDist:
    counts: dict
    total: int

    @classmethod
    def from_rows(cls, rows) -> EmpiricalDist:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim == 1:
            rows = rows[:, None]
        if len(rows) == 0:
            return cls({}, 0)
        keys, counts = np.unique(rows, axis=0, return_counts=True)
        return cls({tuple(int(v) for v in k): int(c) for k, c in zip(keys, counts)}, int(len(rows)))

    @classmethod
    def from_items(cls, items) -> EmpiricalDist:
        c = Counter(items)
        return cls(dict(c), sum(c.values()))

    def freq(self, key) -> float:
        return self.counts.get(key, 0) / self.total if self.total else 0.0


def tv_distance(emp: EmpiricalDist, pmf: dict) -> float:
    if emp.total == 0:
        raise ValueError("empty sample")
    keys = set(emp.counts) | set(pmf)
    return 0.5 * sum(abs(emp.freq(k) - pmf.get(k, 0.0)) for k in keys)


def chi_square_test(emp: EmpiricalDist, pmf: dict, min_expected: float = 5.0) -> float:
    """Goodness-of-fit p-value; cells with expected count below ``min_expected`` are pooled."""
    if emp.total == 0:
        raise ValueError("empty sample")
    n = emp.total
    big = sorted((k for k, p in pmf.items() if p * n >= min_expected), key=lambda k: -pmf[k])
    obs = [emp.counts.get(k, 0) for k in big]
    exp = [pmf[k] * n for k in big]
    rest_obs = n - sum(obs)
    rest_exp = n - sum(exp)
    if rest_exp >= min_expected or (rest_obs and not big):
        obs.append(rest_obs)
        exp.append(rest_exp)
    elif big:
        obs[-1] += rest_obs
        exp[-1] += rest_exp
    if len(obs) < 2:
        return 1.0
    return float(stats.chisquare(obs, exp).pvalue)


def bonferroni(m: int, alpha: float = ALPHA) -> float:
    return alpha / max(m, 1)


def binomial_radius(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n) if n else 0.0


# ---------------------------------------------------------------- identities

@dataclass
class IdentityReport:
    rotation_max_dev: float
    collision_rel_dev: float
    coset_max_slack: float
    loss_lhs: float
    loss_rhs: float
    growth_ok: bool
    tol_rotation: float = 1e-12
    tol_mass: float = 1e-8

    @property
    def passed(self) -> bool:
        return (self.rotation_max_dev <= self.tol_rotation and self.collision_rel_dev <= self.tol_mass
                and self.coset_max_slack >= -self.tol_mass and self.loss_lhs >= self.loss_rhs * (1 - self.tol_mass)
                and self.growth_ok)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def rotation_deviation(rng: np.random.Generator, triples: int = 10_000, n: int = 3) -> float:
    """max |rho_s(x) rho_s(y) - rho_{s sqrt2}(x+y) rho_{s sqrt2}(x-y)| / max(1, sides)."""
    x = rng.uniform(-3, 3, (triples, n))
    y = rng.uniform(-3, 3, (triples, n))
    s = rng.uniform(0.3, 4, triples)
    sq = lambda v: np.sum(v * v, axis=1)
    lhs = np.exp(-math.pi * sq(x) / s**2) * np.exp(-math.pi * sq(y) / s**2)
    rhs = np.exp(-math.pi * sq(x + y) / (2 * s**2)) * np.exp(-math.pi * sq(x - y) / (2 * s**2))
    return float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.maximum(lhs, rhs))))


def check_identities(basis: LatticeBasis, t, s: float, rng: np.random.Generator, ell: int = 3,
                     triples: int = 10_000, eps_rel: float = DEFAULT_EPS) -> IdentityReport:
    shift = Shift.of(t, basis.dim)
    zero = Shift.zero(basis.dim)
    half = s / math.sqrt(2)
    tab = coset_masses(basis, shift, s, eps_rel)
    lhs = float(np.sum(tab.values ** 2))
    rhs = mass_truncated(basis, zero, half, eps_rel).value * mass_truncated(basis, shift, half, eps_rel).value
    collision = abs(lhs - rhs) / rhs
    tab_half = coset_masses(basis, shift, half, eps_rel)
    bound = mass_truncated(basis, zero, half, eps_rel).value * tab_half.values.max()
    slack = (bound - tab.values.max() ** 2) / bound
    loss_lhs, loss_rhs = loss_product_bound(basis, shift, s, ell, eps_rel)
    growth = True
    if s >= 1:
        top = mass_truncated(basis, shift, s, eps_rel)
        ref = mass_truncated(basis, zero, 1.0, eps_rel)
        growth = top.value - top.error_bound <= s ** basis.rank * (ref.value + ref.error_bound)
    return IdentityReport(rotation_deviation(rng, triples, basis.dim), collision, slack, loss_lhs, loss_rhs, growth)


# ---------------------------------------------------------------- sampler statistics

@dataclass
class SamplerReport:
    s: float
    samples: int
    tv: float
    p_value: float
    threshold: float
    tv_max: float = 0.01
    tv_ideal: float | None = None

    @property
    def passed(self) -> bool:
        return self.tv < self.tv_max and self.p_value > self.threshold

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def sampler_test(basis: LatticeBasis, t, s: float, samples: int, rng: np.random.Generator,
                 threshold: float = ALPHA, exact: bool = True) -> SamplerReport:
    shift = Shift.of(t, basis.dim)
    rows = klein_coeffs(basis, shift, s, rng, samples, exact)
    emp = EmpiricalDist.from_rows(rows)
    pmf = exact_dgs_pmf(basis, shift, s)
    return SamplerReport(s, samples, tv_distance(emp, pmf), chi_square_test(emp, pmf), threshold,
                         tv_ideal=ideal_tv(pmf, samples, rng))


def ideal_tv(pmf: dict, samples: int, rng: np.random.Generator) -> float:
    """Plug-in TV of ``samples`` draws taken directly from ``pmf``: the floor any sampler faces."""
    keys = list(pmf)
    p = np.array([pmf[k] for k in keys])
    idx = rng.choice(len(keys), size=samples, p=p / p.sum())
    counts = np.bincount(idx, minlength=len(keys)) / samples
    return float(0.5 * np.abs(counts - p).sum() + 0.5 * (1 - p.sum()))


def _coset_pmf(basis: LatticeBasis, shift: Shift, s: float, code: int) -> dict[tuple, float]:
    """Exact D_{2L + d - t, s}, keyed by coefficients of L."""
    bits = np.array(CosetLabel.from_code(code, basis.rank).bits, dtype=np.int64)
    inner = shift - lattice_vector(basis, bits)
    double = basis.scaled(2)
    pmf = exact_dgs_pmf(double, inner, s)
    return {tuple(int(v) for v in 2 * np.array(k, dtype=np.int64) + bits): p for k, p in pmf.items()}


@dataclass
class MixtureReport:
    coset: str
    per_coset: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)
    weight_p_value: float = 1.0
    weight_max_sigma: float = 0.0
    threshold: float = ALPHA

    @property
    def passed(self) -> bool:
        return (all(p > self.threshold for p in self.per_coset.values())
                and self.weight_p_value > self.threshold and self.weight_max_sigma <= 3.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def coset_output_weights(basis: LatticeBasis, t, s: float, code: int, eps_rel: float = DEFAULT_EPS) -> np.ndarray:
    """Pr[(X1 + X2)/2 in 2L + d - t] for X1, X2 ~ D_{2L + c - t, s}, for every d.

    Each weight is rho_{s/sqrt2}(2L + d - t) rho_{s/sqrt2}(2L + (c xor d)) / rho_s(2L + c - t)^2.
    """
    shift = Shift.of(t, basis.dim)
    half = s / math.sqrt(2)
    shifted = coset_masses(basis, shift, half, eps_rel).values
    centred = coset_masses(basis, Shift.zero(basis.dim), half, eps_rel).values
    base = coset_masses(basis, shift, s, eps_rel).values[code]
    idx = np.arange(len(shifted))
    return shifted * centred[idx ^ code] / base ** 2


def conditional_mixture_test(basis: LatticeBasis, t, s: float, trials: int, rng: np.random.Generator,
                             code: int = 0, min_count: int = 100, alpha: float = ALPHA) -> MixtureReport:
    """Average pairs from one coset, then test each output coset against its exact conditional law."""
    shift = Shift.of(t, basis.dim)
    pts = coset_coeffs(basis, shift, s, code, rng, 2 * trials, exact=True)
    avg = (pts[0::2] + pts[1::2]) // 2
    labels = label_codes(avg)
    weights = coset_output_weights(basis, shift, s, code)
    report = MixtureReport(str(CosetLabel.from_code(code, basis.rank)))
    tested = [d for d in range(len(weights)) if np.count_nonzero(labels == d) >= min_count]
    report.skipped = [str(CosetLabel.from_code(d, basis.rank)) for d in range(len(weights)) if d not in tested]
    report.threshold = bonferroni(len(tested) + 1, alpha)
    for d in tested:
        emp = EmpiricalDist.from_rows(avg[labels == d])
        pmf = _coset_pmf(basis, shift, s / math.sqrt(2), d)
        report.per_coset[str(CosetLabel.from_code(d, basis.rank))] = chi_square_test(emp, pmf)
    counts = np.bincount(labels, minlength=len(weights))
    expected = weights / weights.sum() * trials
    keep = expected > 0
    if keep.sum() > 1:
        report.weight_p_value = float(stats.chisquare(counts[keep], expected[keep]).pvalue)
    p = weights / weights.sum()
    sigma = np.sqrt(np.maximum(p * (1 - p), 1e-300) * trials)
    report.weight_max_sigma = float(np.max(np.abs(counts - expected) / sigma))
    return report


def squared_average_test(basis: LatticeBasis, t, s: float, pairs: int, rng: np.random.Generator,
                         threshold: float = ALPHA) -> SamplerReport:
    """Averages of squared-coset pairs against D_{L - t, s/sqrt2}."""
    shift = Shift.of(t, basis.dim)
    table = coset_masses(basis, shift, s)
    lst = squared_coset_sampler(table, pairs, basis, shift, rng)
    avg = (lst.coeffs[0::2] + lst.coeffs[1::2]) // 2
    emp = EmpiricalDist.from_rows(avg)
    pmf = exact_dgs_pmf(basis, shift, s / math.sqrt(2))
    return SamplerReport(s / math.sqrt(2), pairs, tv_distance(emp, pmf), chi_square_test(emp, pmf), threshold)


# ---------------------------------------------------------------- dominance

@dataclass
class DominanceReport:
    targets: list
    p_no_reject: float
    p_reject: float
    radius_no_reject: float
    radius_reject: float
    trials: int
    ell: int
    M: int
    s: float
    kappa: float

    @property
    def margin(self) -> float:
        return 3 * math.hypot(self.radius_no_reject, self.radius_reject)

    @property
    def passed(self) -> bool:
        return self.p_no_reject >= self.p_reject - self.margin

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(margin=self.margin, passed=self.passed)
        return d


def _contains(rows: np.ndarray, need: Counter) -> bool:
    if not need:
        return True
    have = Counter(map(tuple, rows.tolist()))
    return all(have[k] >= m for k, m in need.items())


def dominance_experiment(basis: LatticeBasis, ell: int, M: int, trials: int, seed: int, t=None,
                         s: float | None = None, kappa: float = 1.0, targets=None, block: int = 500,
                         exact: bool = True) -> DominanceReport:
    """Containment frequency of ``targets`` in the outputs of plain and square-rejection sieves.

    Both pipelines start from M independent samples of D_{L - t, s}. ``targets``
    defaults to the two shortest vectors +-v from ``enum_svp``; coefficients
    refer to ``basis``.
    """
    shift = Shift.of(t, basis.dim)
    n = basis.rank
    if targets is None:
        lam, v = enum_svp(basis)
        targets = [v.coeffs, tuple(-c for c in v.coeffs)]
    else:
        lam = enum_svp(basis)[0]
    if s is None:
        s = 2 ** (ell / 2) * math.sqrt(SVP_WINDOW / n) * lam
    red, rb = reduced_context(basis)
    inv = np.rint(np.linalg.inv(red.transform.astype(np.float64))).astype(np.int64)
    need = Counter(tuple(int(x) for x in np.asarray(c, dtype=np.int64) @ inv) for c in targets)
    tables = [coset_masses(rb, shift, s / 2 ** (i / 2)) for i in range(ell)]
    rejection = SquareSamplerRejection(tables, kappa)
    hits = [0, 0]
    for which, f in enumerate((trivial_rejection, rejection)):
        for b0 in range(0, trials, block):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(which, b0 // block)))
            m = min(block, trials - b0)
            pool = klein_coeffs(rb, shift, s, rng, m * M, exact)
            for j in range(m):
                lst = SampleList(pool[j * M:(j + 1) * M], rb, shift)
                out = reject_and_average(lst, ell, f, rng)
                hits[which] += _contains(out.coeffs, need)
    p_nr, p_r = hits[0] / trials, hits[1] / trials
    return DominanceReport([list(map(int, c)) for c in targets], p_nr, p_r, binomial_radius(p_nr, trials),
                           binomial_radius(p_r, trials), trials, ell, M, float(s), kappa)


def list_count_prob(dist: dict[tuple, float], k: tuple[int, ...]) -> float:
    """Pr[list holds symbol i at least k_i times for all i] for a finite list distribution."""
    return sum(p for lst, p in dist.items() if all(lst.count(i) >= ki for i, ki in enumerate(k)))


def dominates(a: dict[tuple, float], b: dict[tuple, float], alphabet: int, tol: float = 1e-12) -> bool:
    """Exhaustive domination check over every count vector up to the longest list length."""
    longest = max(len(x) for x in itertools.chain(a, b))
    for k in itertools.product(range(longest + 1), repeat=alphabet):
        if sum(k) <= longest and list_count_prob(a, k) < list_count_prob(b, k) - tol:
            return False
    return True


def push_forward(dist: dict[tuple, float], f) -> dict[tuple, float]:
    out: dict[tuple, float] = {}
    for lst, p in dist.items():
        key = tuple(f(lst))
        out[key] = out.get(key, 0.0) + p
    return out


def random_list_distribution(rng: np.random.Generator, alphabet: int, max_len: int, support: int = 6):
    lists = set()
    while len(lists) < support:
        length = int(rng.integers(0, max_len + 1))
        lists.add(tuple(int(v) for v in rng.integers(0, alphabet, length)))
    w = rng.random(len(lists))
    return dict(zip(sorted(lists), (w / w.sum()).tolist()))


SUBLIST_MAPS = {
    "drop_last": lambda lst: lst[:-1],
    "even_positions": lambda lst: lst[::2],
    "drop_symbol_0": lambda lst: [x for x in lst if x != 0],
    "first_two": lambda lst: lst[:2],
}


def domination_facts(rng: np.random.Generator, cases: int = 20, alphabet: int = 3, max_len: int = 4) -> dict:
    """Reflexivity and sublist-map preservation on random enumerable list distributions."""
    reflexive = sublist = 0
    for _ in range(cases):
        d = random_list_distribution(rng, alphabet, max_len)
        reflexive += dominates(d, d, alphabet)
        sublist += all(dominates(d, push_forward(d, f), alphabet) for f in SUBLIST_MAPS.values())
    return {"cases": cases, "reflexive": reflexive, "sublist": sublist,
            "passed": reflexive == cases and sublist == cases}


# ---------------------------------------------------------------- shortest-vector probability

def window_parameter(n: int, lam: float = 1.0, position: float = 0.5) -> float:
    """A parameter inside [1, 1.01] * sqrt(2^0.198 pi e / n) * lambda_1."""
    return (1 + 0.01 * position) * math.sqrt(SVP_WINDOW / n) * lam


def shortest_probability(basis: LatticeBasis, s: float) -> float:
    lam, _ = enum_svp(basis)
    pmf = exact_dgs_pmf(basis, None, s)
    lam2 = lam * lam
    return sum(p for c, p in pmf.items()
               if any(c) and abs(float(exact_sq_norm(basis, Shift.zero(basis.dim), c)) - lam2) <= 1e-9 * lam2)


@dataclass
class ShortestHitReport:
    n: int
    s: float
    exact: float
    empirical: float
    radius: float
    floor: float

    @property
    def passed(self) -> bool:
        return abs(self.empirical - self.exact) <= 3 * self.radius and self.exact >= self.floor

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def shortest_hit_test(basis: LatticeBasis, samples: int, rng: np.random.Generator, position: float = 0.5) -> ShortestHitReport:
    lam, _ = enum_svp(basis)
    n = basis.rank
    s = window_parameter(n, lam, position)
    exact = shortest_probability(basis, s)
    rows = klein_coeffs(basis, Shift.zero(basis.dim), s, rng, samples, exact=True)
    pts = rows.astype(np.float64) @ basis.matrix
    sq = np.einsum("ij,ij->i", pts, pts)
    emp = float(np.mean(np.abs(sq - lam * lam) <= 1e-9 * lam * lam))
    return ShortestHitReport(n, s, exact, emp, binomial_radius(exact, samples), 1.4 ** (-n) / 10)


def tail_check(basis: LatticeBasis, t, s: float, samples: int, rng: np.random.Generator, radii) -> list[dict]:
    """Empirical Pr[|X| > r] against (2e)^(n/2+1) exp(-pi y^2/2) for radii in the valid range."""
    shift = Shift.of(t, basis.dim)
    n = basis.rank
    d = enum_cvp(basis, shift)[0]
    rows = klein_coeffs(basis, shift, s, rng, samples, exact=True)
    pts = rows.astype(np.float64) @ basis.matrix - shift.array
    norms = np.sqrt(np.einsum("ij,ij->i", pts, pts))
    out = []
    for r in radii:
        valid = r > math.sqrt(n / (2 * math.pi)) * s and r > d
        if d > 0:
            valid = valid and r * r > d * d + n * s * s / math.pi * math.log(2 * math.pi * d * d / (n * s * s))
        if not valid:
            continue
        bound = tail_probability(n, (r * r - d * d) / (s * s))
        emp = float(np.mean(norms > r))
        out.append({"r": r, "empirical": emp, "bound": bound,
                    "ok": emp <= bound + 3 * binomial_radius(min(bound, 1.0), samples)})
    return out

