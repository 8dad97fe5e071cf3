"""Named verification suites shared by the CLI and the acceptance tests."""
from __future__ import annotations

import numpy as np

from .lattice import LatticeBasis, gen_random_lattice, int_det
from .verify import (
    ALPHA,
    bonferroni,
    box_search,
    check_identities,
    conditional_mixture_test,
    dominance_experiment,
    enum_cvp,
    enum_svp,
    sampler_test,
    squared_average_test,
)

IDENTITY_PARAMS = (0.7, 1.0, 2.0)
SAMPLER_PARAMS = (1.0, 2.0, 5.0)


def identity_instances(seed: int = 0) -> list[LatticeBasis]:
    return [LatticeBasis.identity(1), LatticeBasis.identity(2),
            LatticeBasis.from_rows([[2, 1], [1, 3]]), gen_random_lattice(3, seed=seed)]


def identities(rng: np.random.Generator, trials: int | None = None, seed: int = 0) -> dict:
    rows = []
    for basis in identity_instances(seed):
        for s in IDENTITY_PARAMS:
            t = rng.uniform(-1, 1, basis.dim).round(6)
            rep = check_identities(basis, t.tolist(), s, rng, ell=3, triples=trials or 10_000)
            rows.append({"rank": basis.rank, "s": s, **rep.to_dict()})
    return {"cases": rows, "passed": all(r["passed"] for r in rows),
            "rotation_max_dev": max(r["rotation_max_dev"] for r in rows),
            "collision_max_rel_dev": max(r["collision_rel_dev"] for r in rows)}


def sampler(rng: np.random.Generator, trials: int | None = None, seed: int = 0) -> dict:
    n = trials or 100_000
    thr = bonferroni(len(SAMPLER_PARAMS))
    reps = [sampler_test(LatticeBasis.identity(2), None, s, n, rng, threshold=thr).to_dict() for s in SAMPLER_PARAMS]
    return {"cases": reps, "passed": all(r["passed"] for r in reps)}


def mixture(rng: np.random.Generator, trials: int | None = None, seed: int = 0) -> dict:
    n = trials or 100_000
    z2 = LatticeBasis.identity(2)
    cond = conditional_mixture_test(z2, None, 2.0, n, rng, code=0, alpha=ALPHA / 2).to_dict()
    glob = squared_average_test(z2, [0.25, 0.5], 2.0, n, rng, threshold=ALPHA / 2).to_dict()
    return {"conditional": cond, "squared_average": {**glob, "passed": glob["p_value"] > ALPHA / 2},
            "passed": cond["passed"] and glob["p_value"] > ALPHA / 2}


def dominance_instances(seed: int = 0) -> list[LatticeBasis]:
    return [LatticeBasis.identity(2), gen_random_lattice(3, seed=seed)]


def dominance(rng: np.random.Generator, trials: int | None = None, seed: int = 0) -> dict:
    rows = []
    for basis in dominance_instances(seed):
        for ell in (1, 2):
            rep = dominance_experiment(basis, ell, 2 ** 8, trials or 10_000, seed)
            rows.append({"rank": basis.rank, **rep.to_dict()})
    return {"cases": rows, "passed": all(r["passed"] for r in rows)}


def random_small_basis(rng: np.random.Generator, max_n: int = 4, lo: int = -5, hi: int = 5) -> LatticeBasis:
    n = int(rng.integers(1, max_n + 1))
    while True:
        rows = rng.integers(lo, hi + 1, (n, n))
        if int_det(rows.tolist()) != 0:
            return LatticeBasis(rows)


def oracle(rng: np.random.Generator, trials: int | None = None, seed: int = 0) -> dict:
    count = trials or 50
    mismatches = []
    for i in range(count):
        basis = random_small_basis(rng)
        t = rng.uniform(-5, 5, basis.dim).round(3).tolist()
        a, b = enum_svp(basis), box_search(basis)
        c, d = enum_cvp(basis, t), box_search(basis, t)
        if a[0] != b[0] or a[1].coeffs != b[1].coeffs or c[0] != d[0] or c[1].coeffs != d[1].coeffs:
            mismatches.append({"instance": i, "basis": basis.numer.tolist(), "target": t})
    return {"instances": count, "mismatches": mismatches, "passed": not mismatches}
