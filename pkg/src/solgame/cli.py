"""Command-line entry point.

Exit codes: 0 all audits pass, 1 some audit failed, 2 usage or domain error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import analysis
from .arith import DomainError, check_prime, fmt, frac
from .constants import C_SMOKE
from .runs import RunSpec, check_gate, replay, run
from .solenoid import PrimeSet
from .verify import run_suite

EXIT_OK, EXIT_AUDIT, EXIT_USAGE = 0, 1, 2


def _list(s: str | None) -> list[str]:
    if s is None:
        return []
    return [t.strip() for t in s.split(",") if t.strip()]


def _primes(s) -> tuple[int, ...]:
    if isinstance(s, (list, tuple)):
        items = s
    else:
        items = _list(s)
    try:
        ps = tuple(int(p) for p in items)
    except ValueError as e:
        raise DomainError(f"primes: {e}") from None
    for p in ps:
        check_prime(p)
    if len(set(ps)) != len(ps):
        raise DomainError("primes: duplicates")
    return ps


def write_atomic(path: Path, text: str):
    """Write via a temporary file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---- simulate ---------------------------------------------------------------

SPEC_FLAGS = {
    "mode": "mode", "primes": "primes", "map": "maps", "translation": "translation",
    "target": "targets", "beta": "beta", "alpha": "alpha", "gamma": "gamma", "psi": "psi",
    "depth": "depth", "seed": "seed", "bob": "bob", "r0": "r0", "center": "center",
}


def build_spec(args) -> RunSpec:
    """--config supplies the base run config; explicit flags override it."""
    base = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise DomainError(f"config: {e}") from None
        base.pop("runs", None)
    spec = RunSpec.from_json(base)
    for flag, name in SPEC_FLAGS.items():
        v = getattr(args, flag)
        if v is None:
            continue
        if name == "primes":
            v = _primes(v)
        elif name in ("maps", "targets"):
            v = tuple(x for item in v for x in (item.split(",") if name == "maps" else [item]))
        setattr(spec, name, v)
    spec.primes = _primes(list(spec.primes))
    if spec.mode == "avoid" and len(spec.maps) > 1:
        spec.mode = "intersect"
    for name in ("beta", "alpha", "gamma", "psi", "r0"):
        v = getattr(spec, name)
        if v is not None:
            frac(v)
    if spec.depth < 1:
        raise DomainError("depth must be positive")
    return spec


def _one(payload):
    idx, spec_json, slack = payload
    res = run(RunSpec.from_json(spec_json), Fraction(slack))
    a = res.audit
    summary = {"run": idx, "seed": spec_json["seed"], "outcome": a["outcome"],
               "passed": res.passed, "solver_rounds": a["solver_rounds"],
               "transcript_issues": len(a["transcript_issues"])}
    for key in ("min_orbit_distance", "certified_j", "windows", "window_checks",
                "window_failures", "orbit_certificate", "max_turn_gap", "inner_game_issues"):
        if key in a:
            summary[key] = a[key]
    return idx, res.transcript.dumps(), summary


def cmd_simulate(args) -> int:
    spec = build_spec(args)
    check_gate(spec)
    if args.runs < 0:
        raise DomainError("runs must be non-negative")
    out = Path(args.out)
    jobs = []
    for i in range(args.runs):
        s = spec.to_json()
        s["seed"] = spec.seed + i
        jobs.append((i, s, fmt(frac(args.fault_slack))))
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as ex:
            results = list(ex.map(_one, jobs))
    else:
        results = [_one(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    summaries = []
    for idx, text, summ in results:
        name = f"run_{idx:04d}.json"
        write_atomic(out / name, text)
        summ["file"] = name
        summaries.append(summ)
    failed = [s["run"] for s in summaries if not s["passed"]]
    report = {"spec": spec.to_json(), "runs": len(summaries), "passed": len(summaries) - len(failed),
              "failed": failed, "results": summaries}
    write_atomic(out / "summary.json", json.dumps(report, indent=1))
    print(f"runs={len(summaries)} passed={len(summaries) - len(failed)} failed={len(failed)} "
          f"summary={out / 'summary.json'}")
    return EXIT_AUDIT if failed else EXIT_OK


# ---- analyze ----------------------------------------------------------------

def _sweep_rows(args) -> tuple[list[str], list[dict]]:
    kind = args.sweep
    primes = _primes(args.primes) if args.primes else None
    if kind == "pp":
        cols = ["x", "product", "theta", "neg_log_product", "margin", "bound_check",
                "strong_check", "intermediate_check"]
        return cols, [analysis.prod_bound_check(frac(x), primes).row() for x in _list(args.x)]
    if kind == "smoke":
        c = frac(args.c) if args.c else C_SMOKE
        rows = []
        for r in _list(args.radii):
            ok, lhs, rhs = analysis.pp_smoke_check(frac(r), c)
            rows.append({"r": r, "c": fmt(c), "ok": ok, "log_lhs": str(lhs), "log_rhs": str(rhs)})
        return ["r", "c", "ok", "log_lhs", "log_rhs"], rows
    if kind == "haar":
        P = PrimeSet(primes or ())
        rows = []
        for r in _list(args.radii):
            b = analysis.haar_ball_bound(frac(r), P)
            m = analysis.exact_ball_measure(frac(r), P, closed=True)
            rows.append({"r": r, "bound": fmt(b), "exact": fmt(m), "ok": m <= b})
        return ["r", "bound", "exact", "ok"], rows
    if kind == "dim":
        P = PrimeSet(primes or (2, 3))
        cols = ["beta"] + [f"nc_{i}" for i in range(P.l)] + ["nc_min", "dim_lower"]
        rows = []
        for b in _list(args.betas):
            beta = frac(b)
            row = {"beta": fmt(beta)}
            for i in range(P.l):
                row[f"nc_{i}"] = analysis.nc_lower(beta, P, i)
            row["nc_min"] = analysis.nc_min(beta, P)
            row["dim_lower"] = str(analysis.hausdorff_lower(beta, P))
            rows.append(row)
        return cols, rows
    if kind == "trunc":
        beta = frac(args.beta or "1/210")
        rows = [{"m": m, "primes": " ".join(map(str, ps)), "dim_lower": str(d)}
                for m, ps, d in analysis.truncation_sweep(beta, [int(s) for s in _list(args.sizes)])]
        return ["m", "primes", "dim_lower"], rows
    if kind == "nc":
        P = PrimeSet(primes or (2, 3))
        rows = []
        for b in _list(args.betas):
            beta = frac(b)
            for i in range(P.l):
                lo = analysis.nc_lower(beta, P, i)
                hi = analysis.nc_bruteforce(beta, P, i)
                rows.append({"beta": fmt(beta), "index": i, "nc_lower": lo, "nc_bruteforce": hi,
                             "ok": hi >= lo})
        return ["beta", "index", "nc_lower", "nc_bruteforce", "ok"], rows
    raise DomainError(f"unknown sweep {kind!r}")


def cmd_analyze(args) -> int:
    cols, rows = _sweep_rows(args)
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        f = open(path, "w", encoding="utf-8", newline="")
    else:
        f = sys.stdout
    try:
        w = csv.DictWriter(f, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if f is not sys.stdout:
            f.close()
    flags = [v for r in rows for k, v in r.items() if isinstance(v, bool)]
    return EXIT_OK if all(flags) else EXIT_AUDIT


# ---- fstar ------------------------------------------------------------------

def cmd_fstar(args) -> int:
    from .affine import AffineEndo
    from .runs import parse_point
    from .strategies import AvoidanceAlice
    P = PrimeSet(_primes(args.primes))
    beta0 = frac(args.beta0)
    A = AffineEndo.linear_map(P, frac(args.map))
    alice = AvoidanceAlice(A, parse_point(P, args.target), beta0)
    tree = analysis.fstar_tree(alice, beta0, args.depth, P, budget=args.budget, expand=args.expand)
    audit = analysis.audit_tree(tree)
    mass = analysis.mass_distribution_check(tree)
    ok = not audit["failures"] and audit["psi_injective"] and not mass["failures"]
    report = {"beta0": fmt(beta0), "primes": list(P.primes), "depth": tree.depth,
              "branching": tree.branching, "expand": tree.expand, "nodes": mass["nodes"],
              "leaves": audit["leaves"], "psi_injective": audit["psi_injective"],
              "separation_failures": audit["failures"][:20],
              "s": str(mass["s"]), "dim_lower": str(mass["dim_lower"]),
              "min_log_slack": str(mass["min_log_slack"]), "mass_failures": mass["failures"][:20],
              "passed": ok}
    text = json.dumps(report, indent=1)
    if args.out:
        write_atomic(Path(args.out), text)
    print(text)
    return EXIT_OK if ok else EXIT_AUDIT


# ---- verify / replay ----------------------------------------------------------

def cmd_verify(args) -> int:
    results = run_suite(args.seed, args.cases, args.filter or "", args.inject_fault)
    report = {"seed": args.seed, "inject_fault": args.inject_fault,
              "properties": [r.to_json() for r in results]}
    text = json.dumps(report, indent=1)
    if args.out:
        write_atomic(Path(args.out), text)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} cases={r.cases}")
    return EXIT_OK if results and all(r.passed for r in results) else EXIT_AUDIT


def cmd_replay(args) -> int:
    try:
        data = json.loads(Path(args.transcript).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise DomainError(f"transcript: {e}") from None
    ok, issues = replay(data)
    for s in issues:
        print(s)
    print("replay ok" if ok else f"replay failed: {len(issues)} issue(s)")
    return EXIT_OK if ok else EXIT_AUDIT


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="solgame", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="play seeded games and audit them")
    sp.add_argument("--config", help="JSON run spec; flags override its fields")
    sp.add_argument("--mode", choices=("avoid", "intersect", "strong", "transfer"))
    sp.add_argument("--primes")
    sp.add_argument("--map", action="append", help="linear part m/n; repeat or comma-separate")
    sp.add_argument("--translation", help='"q" or "real;p1,p2"')
    sp.add_argument("--target", action="append")
    sp.add_argument("--beta")
    sp.add_argument("--alpha")
    sp.add_argument("--gamma")
    sp.add_argument("--psi")
    sp.add_argument("--depth", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--bob", choices=("random", "chase", "escape"))
    sp.add_argument("--r0")
    sp.add_argument("--center")
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", default="solgame_runs")
    sp.add_argument("--fault-slack", default="0", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_simulate)

    sa = sub.add_parser("analyze", help="counting and dimension sweeps as CSV")
    sa.add_argument("--sweep", required=True, choices=("pp", "smoke", "haar", "dim", "trunc", "nc"))
    sa.add_argument("--x", default="")
    sa.add_argument("--primes")
    sa.add_argument("--betas", default="")
    sa.add_argument("--beta")
    sa.add_argument("--sizes", default="")
    sa.add_argument("--radii", default="")
    sa.add_argument("--c")
    sa.add_argument("--out")
    sa.set_defaults(func=cmd_analyze)

    sf = sub.add_parser("fstar", help="build and audit the Cantor subtree")
    sf.add_argument("--primes", default="2,3")
    sf.add_argument("--beta0", default="1/12")
    sf.add_argument("--map", default="3/2")
    sf.add_argument("--target", default="0")
    sf.add_argument("--depth", type=int, default=3)
    sf.add_argument("--expand", type=int)
    sf.add_argument("--budget", type=int, default=10**5)
    sf.add_argument("--out")
    sf.set_defaults(func=cmd_fstar)

    sv = sub.add_parser("verify", help="run the seeded invariant suite")
    sv.add_argument("--seed", type=int, default=0)
    sv.add_argument("--cases", type=int, default=1000)
    sv.add_argument("--filter")
    sv.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    sv.add_argument("--out")
    sv.set_defaults(func=cmd_verify)

    sr = sub.add_parser("replay", help="re-audit and re-run a transcript")
    sr.add_argument("transcript")
    sr.set_defaults(func=cmd_replay)
    return ap


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ValueError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
