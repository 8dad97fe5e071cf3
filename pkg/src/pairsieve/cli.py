"""Command-line front end; every command emits a replayable run manifest."""
from __future__ import annotations

import argparse
import hashlib
import json
import platform
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .gaussian import coset_masses, klein_coeffs, mass_truncated
from .lattice import (
    BasisFormatError,
    DegenerateBasisError,
    SampleList,
    Shift,
    gen_random_lattice,
    parse_basis,
    serialize_basis,
)
from .sieve import reject_and_average, trivial_rejection
from .solvers import SolverParams, solve_cvp, solve_svp

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SUITES = ("identities", "sampler", "mixture", "dominance", "oracle", "all")


class UsageError(Exception):
    pass


def _target(text: str | None, n: int) -> Shift | None:
    if text is None:
        return None
    try:
        vals = [v.strip() for v in text.split(",") if v.strip()]
        sh = Shift.of(vals)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad --target: {exc}") from exc
    if len(sh) != n:
        raise UsageError("dimension mismatch between basis and target")
    return sh


def _load(args):
    if not args.basis:
        raise UsageError("--basis is required")
    path = Path(args.basis)
    if not path.exists():
        raise UsageError(f"no such basis file: {path}")
    basis, target = parse_basis(path)
    explicit = _target(getattr(args, "target", None), basis.dim)
    return basis, explicit if explicit is not None else target


def _rows_text(rows) -> str:
    return "".join(" ".join(str(int(v)) for v in r) + "\n" for r in rows)


def cmd_gen(args) -> tuple[str, int]:
    basis = gen_random_lattice(args.n, args.style, args.seed)
    return serialize_basis(basis, "json" if args.format == "json" else "text"), EXIT_OK


def _params(args) -> SolverParams:
    return SolverParams(M=args.M, ell=args.ell, ratio=args.ratio, count=args.count, u=args.u, seed=args.seed,
                        trials=args.trials, threads=args.threads)


def cmd_svp(args) -> tuple[str, int]:
    basis, _ = _load(args)
    res = solve_svp(basis, _params(args))
    print(f"svp: norm {res.norm:.12g} at schedule index {res.schedule_index}", file=sys.stderr)
    return res.to_json() + "\n", EXIT_OK


def cmd_cvp(args) -> tuple[str, int]:
    basis, target = _load(args)
    if target is None:
        raise UsageError("cvp needs --target or a target in the basis file")
    res = solve_cvp(basis, target, _params(args))
    print(f"cvp: distance {res.norm:.12g} at schedule index {res.schedule_index}", file=sys.stderr)
    return res.to_json() + "\n", EXIT_OK


def _require_s(args) -> float:
    if args.s is None or not args.s > 0:
        raise UsageError("--s must be a positive number")
    return args.s


def cmd_sample(args) -> tuple[str, int]:
    basis, target = _load(args)
    s = _require_s(args)
    rng = np.random.default_rng(args.seed)
    rows = klein_coeffs(basis, Shift.of(target, basis.dim), s, rng, args.count, exact=args.exact)
    return _rows_text(rows), EXIT_OK


def cmd_sieve(args) -> tuple[str, int]:
    basis, target = _load(args)
    s = _require_s(args)
    shift = Shift.of(target, basis.dim)
    rng = np.random.default_rng(args.seed)
    M = args.M or 2 ** (basis.rank + 4)
    ell = 3 if args.ell is None else args.ell
    start = SampleList(klein_coeffs(basis, shift, s, rng, M, exact=args.exact), basis, shift)
    trace: list[dict] = []
    out = reject_and_average(start, ell, trivial_rejection, rng, trace=trace.append)
    if args.trace:
        Path(args.trace).write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in trace))
    for r in trace:
        print(f"step {r['step']}: {r['M_in']} -> {r['M_out']} min_norm={r['min_norm']}", file=sys.stderr)
    return _rows_text(out.coeffs), EXIT_OK


def cmd_mass(args) -> tuple[str, int]:
    basis, target = _load(args)
    s = _require_s(args)
    shift = Shift.of(target, basis.dim)
    table = coset_masses(basis, shift, s, args.eps)
    doc = json.loads(table.to_json())
    total = mass_truncated(basis, shift, s, args.eps)
    doc["mass"] = total.value
    doc["mass_error_bound"] = total.error_bound
    return json.dumps(doc, sort_keys=True) + "\n", EXIT_OK


def cmd_verify(args) -> tuple[str, int]:
    from . import suites

    rng_seed = args.seed
    picked = SUITES[:-1] if args.suite == "all" else (args.suite,)
    reports = {}
    for i, name in enumerate(picked):
        rng = np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(i,)))
        reports[name] = getattr(suites, name)(rng, trials=args.trials, seed=rng_seed)
    ok = all(r["passed"] for r in reports.values())
    for name, r in reports.items():
        print(f"{name}: {'PASS' if r['passed'] else 'FAIL'}", file=sys.stderr)
    return json.dumps({"suites": reports, "passed": ok}, sort_keys=True) + "\n", EXIT_OK if ok else EXIT_FAIL


def _add_common(p, *, basis=True, target=False, s=False, sieve=False, seed=True, threads=False):
    if basis:
        p.add_argument("--basis", help="basis file (text or JSON)")
    if target:
        p.add_argument("--target", help='comma separated target, e.g. "0.5,1/3"')
    if s:
        p.add_argument("--s", type=float, help="Gaussian parameter")
    if sieve:
        p.add_argument("--M", type=int, help="list size (default 2^(n+4))")
        p.add_argument("--ell", type=int, help="number of pair-and-average steps")
    if seed:
        p.add_argument("--seed", type=int, help="RNG seed (drawn from OS entropy when absent)")
    if threads:
        p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json", help="write the primary output here instead of stdout")
    p.add_argument("--manifest", help="write the run manifest here instead of stderr")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pairsieve", description="Discrete Gaussian sieving for SVP and CVP.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random basis")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--style", choices=("uniform-integer", "knapsack"), default="uniform-integer")
    p.add_argument("--format", choices=("text", "json"), default="text")
    _add_common(p, basis=False)

    for name in ("svp", "cvp"):
        p = sub.add_parser(name, help=f"solve {name.upper()}")
        _add_common(p, target=name == "cvp", sieve=True, threads=True)
        p.add_argument("--u", type=int, help="reduction block parameter")
        p.add_argument("--ratio", type=float, help="schedule ratio")
        p.add_argument("--count", type=int, help="schedule length")
        p.add_argument("--trials", type=int, default=1)

    p = sub.add_parser("sample", help="draw discrete Gaussian samples")
    _add_common(p, target=True, s=True)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--exact", action="store_true", help="use the rejection-corrected sampler")

    p = sub.add_parser("sieve", help="sample then pair-and-average")
    _add_common(p, target=True, s=True, sieve=True)
    p.add_argument("--trace", help="write per-step JSON lines here")
    p.add_argument("--exact", action="store_true")

    p = sub.add_parser("mass", help="coset mass table")
    _add_common(p, target=True, s=True, seed=False)
    p.add_argument("--eps", type=float, default=1e-9)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--trials", type=int, help="sample/trial count override")
    _add_common(p, basis=False)

    p = sub.add_parser("replay", help="rerun a manifest and compare its result digest")
    p.add_argument("manifest_file")
    p.add_argument("--threads", type=int, help="override the thread count")
    p.add_argument("--json", help="write the replayed primary output here")
    return ap


COMMANDS = {"gen": cmd_gen, "svp": cmd_svp, "cvp": cmd_cvp, "sample": cmd_sample, "sieve": cmd_sieve,
            "mass": cmd_mass, "verify": cmd_verify}


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _versions() -> dict:
    import numba
    import scipy

    return {"pairsieve": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__, "backend": BACKEND}


def _clean_argv(argv: list[str]) -> list[str]:
    """Drop output-location and thread flags; they never change the primary output."""
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        key = tok.split("=", 1)[0]
        if key in ("--json", "--manifest", "--threads"):
            skip = "=" not in tok
            continue
        out.append(tok)
    return out


def _run(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        return _replay(args)
    if getattr(args, "seed", "absent") is None:
        args.seed = secrets.randbits(63)
        argv = [*argv, "--seed", str(args.seed)]
    started = time.time()
    try:
        text, code = COMMANDS[args.command](args)
    except (UsageError, BasisFormatError, DegenerateBasisError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        Path(args.json).write_text(text)
    else:
        sys.stdout.write(text)
    manifest = {
        "command": args.command,
        "argv": _clean_argv(argv),
        "params": {k: v for k, v in vars(args).items() if k not in ("json", "manifest")},
        "seed": getattr(args, "seed", None),
        "versions": _versions(),
        "started": started,
        "wall_clock": time.time() - started,
        "result_digest": _digest(text),
        "exit_code": code,
    }
    blob = json.dumps(manifest, sort_keys=True, default=str)
    if args.manifest:
        Path(args.manifest).write_text(blob + "\n")
    else:
        print(blob, file=sys.stderr)
    return code


def _replay(args) -> int:
    try:
        manifest = json.loads(Path(args.manifest_file).read_text())
        argv = list(manifest["argv"])
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: unreadable manifest: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.threads is not None and manifest["command"] in ("svp", "cvp"):
        argv += ["--threads", str(args.threads)]
    parser = build_parser()
    inner = parser.parse_args(argv)
    try:
        text, _ = COMMANDS[inner.command](inner)
    except (UsageError, BasisFormatError, DegenerateBasisError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        Path(args.json).write_text(text)
    same = _digest(text) == manifest["result_digest"]
    print(json.dumps({"replayed": manifest["command"], "identical": same}), file=sys.stderr)
    return EXIT_OK if same else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return _run(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
