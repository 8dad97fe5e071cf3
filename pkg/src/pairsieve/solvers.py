"""End-to-end SVP and approximate CVP by Gaussian sampling plus pair-and-average."""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .lattice import LatticeBasis, LatticePoint, Shift, exact_sq_norm, fraction_sqrt
from .reduction import ReductionConfig, hkz_reduce, lambda1_estimate, nearest_plane_coeffs
from .sieve import prepare_start, reject_and_average, trivial_rejection

SVP_RATIO = 1 / 1.01
# Target window for s / 2^(ell/2): sqrt(2^0.198 * pi * e / n) * lambda_1.
SVP_WINDOW = 2 ** 0.198 * math.pi * math.e


class NoCandidateError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverParams:
    M: int | None = None
    ell: int | None = None
    ratio: float | None = None
    count: int | None = None
    u: int | None = None
    seed: int = 0
    trials: int = 1
    threads: int = 1
    exact: bool = False

    def __post_init__(self):
        if self.M is not None and self.M < 2:
            raise ValueError("M must be at least 2")
        if self.ell is not None and self.ell < 0:
            raise ValueError("ell must be nonnegative")
        if self.ratio is not None and not 0 < self.ratio < 1:
            raise ValueError("schedule ratio must lie in (0, 1)")
        if self.count is not None and self.count < 1:
            raise ValueError("schedule count must be positive")
        if self.trials < 1 or self.threads < 1:
            raise ValueError("trials and threads must be positive")


@dataclass
class SolverResult:
    problem: str
    vector: LatticePoint
    norm: float
    schedule_index: int
    trial: int
    seed: int
    params: dict
    stats: list = field(default_factory=list)

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.vector.coeffs

    def to_dict(self) -> dict:
        return {"problem": self.problem, "dim": self.vector.basis.rank, "norm": self.norm,
                "coeffs": list(self.coeffs), "schedule_index": self.schedule_index, "trial": self.trial,
                "seed": self.seed, "params": self.params, "trace": self.stats}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def svp_schedule(n: int, ell: int, lam_hat: float, ratio: float = SVP_RATIO, count: int | None = None) -> list[float]:
    """Parameters sweeping s / 2^(ell/2) down through the whole [lam_hat 2^(-n/2), lam_hat] bracket.

    The sweep starts 1% above 2^(ell/2) sqrt(2^0.198 pi e / n) lam_hat so that
    some step lands in the 1% window above the target for the true lambda_1.
    """
    if count is None:
        count = math.ceil(math.log(2 ** (n / 2)) / -math.log(ratio)) + 1
    top = 1.01 * 2 ** (ell / 2) * math.sqrt(SVP_WINDOW / n) * lam_hat
    return [top * ratio ** i for i in range(count + 1)]


def cvp_schedule(n: int, ell: int, d_hat: float, ratio: float = 0.5, count: int | None = None) -> list[float]:
    """s_i = 20 n^2 ratio^i d_hat for i = 1..count.

    By default the count runs until s_i / 2^(ell/2) drops below d_hat 2^(-n/2) / 4,
    so the final parameter is small even when d_hat overestimates by 2^(n/2).
    """
    if count is None:
        need = math.log(80 * n * n) + (n - ell) / 2 * math.log(2)
        count = max(n, math.ceil(need / -math.log(ratio)))
    return [20 * n * n * ratio ** i * d_hat for i in range(1, count + 1)]


def _rng(seed: int, trial: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial, index)))


def _svp_key(prim: LatticeBasis, coeffs) -> tuple:
    c = list(coeffs)
    lead = next(v for v in c if v != 0)
    canon = [v if lead > 0 else -v for v in c]
    return exact_sq_norm(prim, Shift.zero(prim.dim), canon), tuple(-v for v in canon), tuple(canon)


def _cvp_key(prim: LatticeBasis, shift: Shift, coeffs) -> tuple:
    c = tuple(int(v) for v in coeffs)
    return exact_sq_norm(prim, shift, c), c, c


def _best(prim, shift, coeffs: np.ndarray, keyfn):
    """Exact argmin among rows whose float norm is within rounding of the float minimum."""
    pts = coeffs.astype(np.float64) @ prim.matrix - shift.array
    sq = np.einsum("ij,ij->i", pts, pts)
    near = np.flatnonzero(sq <= sq.min() * (1 + 1e-9) + 1e-12)
    return min(keyfn(coeffs[i]) for i in near)


def _run_schedule(task):
    (prim, shift, red, s, M, ell, u, seed, trial, index, exact, nonzero) = task
    rng = _rng(seed, trial, index)
    start = prepare_start(prim, shift, M, u, s, rng, check="off", reduced=red, exact=exact)
    trace: list[dict] = []
    out = reject_and_average(start.samples, ell, trivial_rejection, rng, trace=trace.append)
    if len(out) == 0:
        return None
    full = start.to_input_coeffs(out.coeffs)
    if nonzero:
        full = full[np.any(full != 0, axis=1)]
        if len(full) == 0:
            return None
        key = _best(prim, shift, full, lambda c: _svp_key(prim, c))
    else:
        key = _best(prim, shift, full, lambda c: _cvp_key(prim, shift, c))
    return key, trial, index, trace


def _solve(problem, basis, shift, schedule, M, ell, params, red):
    prim = LatticeBasis(basis.prim)
    shift_p = shift.scaled(1 / basis.scale)
    tasks = [(prim, shift_p, red, s, M, ell, params.u, params.seed, trial, i, params.exact, problem == "svp")
             for trial in range(params.trials) for i, s in enumerate(schedule)]
    if params.threads > 1:
        with ThreadPoolExecutor(max_workers=params.threads) as pool:
            results = list(pool.map(_run_schedule, tasks))
    else:
        results = [_run_schedule(t) for t in tasks]
    found = [r for r in results if r is not None]
    if not found:
        raise NoCandidateError("no candidate found (increase M)")
    key, trial, index, trace = min(found, key=lambda r: (r[0][:2], r[1], r[2]))
    point = LatticePoint(key[2], basis, shift)
    return point, trial, index, trace


def _param_dict(params: SolverParams, M: int, ell: int, schedule: list[float]) -> dict:
    d = asdict(params)
    d.update(M=M, ell=ell, count=len(schedule), s_first=schedule[0], s_last=schedule[-1])
    d.pop("threads")
    return d


def solve_svp(basis: LatticeBasis, params: SolverParams | None = None) -> SolverResult:
    """Shortest nonzero vector; sign normalized so the first nonzero coefficient is positive."""
    params = params or SolverParams()
    if basis.rank != basis.dim:
        raise ValueError("SVP solver expects a full-rank basis")
    n = basis.rank
    M = params.M or 2 ** (n + 4)
    ell = 3 if params.ell is None else params.ell
    prim = LatticeBasis(basis.prim)
    red = hkz_reduce(prim, ReductionConfig(u=params.u))
    lam_hat = lambda1_estimate(prim)
    schedule = svp_schedule(n, ell, lam_hat, params.ratio or SVP_RATIO, params.count)
    point, trial, index, trace = _solve("svp", basis, Shift.zero(basis.dim), schedule, M, ell, params, red)
    return SolverResult("svp", point, point.norm(), index, trial, params.seed,
                        _param_dict(params, M, ell, schedule), trace)


def solve_cvp(basis: LatticeBasis, t, params: SolverParams | None = None) -> SolverResult:
    """Approximate closest vector to ``t``; ``vector`` is the point y - t and ``norm`` its length."""
    params = params or SolverParams()
    if basis.rank != basis.dim:
        raise ValueError("CVP solver expects a full-rank basis")
    n = basis.rank
    shift = Shift.of(t, basis.dim)
    M = params.M or 2 ** (n + 4)
    ell = math.ceil(n / 4) if params.ell is None else params.ell
    prim = LatticeBasis(basis.prim)
    red = hkz_reduce(prim, ReductionConfig(u=params.u))
    rb = red.basis
    babai = red.to_input_coeffs(nearest_plane_coeffs(rb.prim, rb.prim_gso, shift.array / float(basis.scale)))
    d_hat = fraction_sqrt(exact_sq_norm(basis, shift, babai)) / float(basis.scale)
    if d_hat == 0:
        point = LatticePoint(tuple(babai), basis, shift)
        return SolverResult("cvp", point, 0.0, 0, 0, params.seed, _param_dict(params, M, ell, [0.0]), [])
    schedule = cvp_schedule(n, ell, d_hat, params.ratio or 0.5, params.count)
    point, trial, index, trace = _solve("cvp", basis, shift, schedule, M, ell, params, red)
    return SolverResult("cvp", point, point.norm(), index + 1, trial, params.seed,
                        _param_dict(params, M, ell, schedule), trace)


def lattice_vector_of(result: SolverResult) -> list[Fraction]:
    """The lattice vector y (for CVP, the closest-vector candidate itself)."""
    b = result.vector.basis
    c = result.coeffs
    return [sum((Fraction(int(b.numer[i, j]), b.den) * c[i] for i in range(b.rank)), Fraction(0))
            for j in range(b.dim)]
