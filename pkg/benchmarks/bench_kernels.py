"""Time the hot kernels under the numba and pure-numpy backends.

Each backend runs in its own subprocess because the choice is fixed at import.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from pairsieve import _kernels
from pairsieve._backend import BACKEND
from pairsieve.lattice import LatticeBasis, gen_random_lattice
from pairsieve.enumeration import points_within

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
basis = gen_random_lattice(8, seed=1)
gs = basis.gso
unif = rng.random((20000, 8))
codes = rng.integers(0, 256, 200000)
z2 = LatticeBasis.identity(6).gso


def best(fn):
    fn()  # compile / warm up
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def lll():
    b = np.array(basis.prim)
    u = np.eye(8, dtype=np.int64)
    _kernels.lll_inplace(b, u, 0.99)


out = {
    "backend": BACKEND,
    "klein_batch_20k_n8": best(lambda: _kernels.klein_batch(gs.mu, gs.bsq, np.zeros(8), 40.0, unif)),
    "pair_indices_200k": best(lambda: _kernels.pair_indices(codes, 8)),
    "enum_collect_Z6_r2_6": best(lambda: points_within(z2.mu, z2.bsq, np.zeros(6), 6.0)),
    "lll_n8": best(lll),
}
print(json.dumps(out))
"""


def run(backend: str, repeat: int) -> dict:
    env = dict(os.environ, PAIRSIEVE_BACKEND=backend)
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    start = time.time()
    fast, slow = run("numba", args.repeat), run("numpy", args.repeat)
    print(f"{'kernel':26s} {'numba [ms]':>12s} {'numpy [ms]':>12s} {'speedup':>9s}")
    for key in fast:
        if key == "backend":
            continue
        a, b = fast[key] * 1e3, slow[key] * 1e3
        print(f"{key:26s} {a:12.3f} {b:12.3f} {b / a:9.1f}x")
    print(f"(total wall time {time.time() - start:.1f}s)")


if __name__ == "__main__":
    main()
