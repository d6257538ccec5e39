"""Command-line front end.

Exit codes: 0 success, 1 verification failures, 2 invalid input,
3 numeric failure, 4 exact evaluation over budget.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import bounds as B
from . import iteration as it
from . import verify as V
from .errors import (
    BudgetExceeded, DimensionMismatch, HorizonExhausted, InvalidScenario, NonFiniteNumeric,
    WitnessInvalid,
)
from .rates import parse_natfun
from .scenario_io import load_scenario

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_NUMERIC, EXIT_BUDGET = 0, 1, 2, 3, 4
REPORT_JSON = "report.json"
SUMMARY_CSV = "summary.csv"
SUITES = ("operators", "regularity", "metastability", "lemmas", "all")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _natfun(text, flag):
    try:
        return parse_natfun(text)
    except ValueError as exc:
        raise InvalidScenario(f"{flag}: {exc}") from None


# ---------------------------------------------------------------------------
# run


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    if args.steps < 0:
        raise InvalidScenario("--steps must be >= 0")
    if args.gamma <= 0:
        raise InvalidScenario("--gamma must be positive")
    try:
        traj = it.run(sc, args.steps)
    except HorizonExhausted as exc:
        raise InvalidScenario(str(exc)) from None
    text = traj.to_csv(args.gamma)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bound


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise InvalidScenario(f"--functional {args.functional} needs " + ", ".join("--" + m for m in missing))


def evaluate_bound(sc, args) -> B.BoundValue:
    ctx = B.BoundContext.from_scenario(sc, mode=args.mode)
    fn = args.functional
    _require(args, "k")
    k = args.k
    if fn == "xi":
        return B.xi(ctx, k)
    if fn == "chi":
        return B.chi(ctx, k)
    if fn in ("delta", "sigma1", "sigma2"):
        _require(args, "n")
        if fn == "delta":
            return B.delta_b(ctx, k, args.n)
        return B.sigma(int(fn[-1]), ctx, k, args.n)
    if fn in ("theta1", "theta2"):
        _require(args, "R", "G")
        return B.theta(int(fn[-1]), ctx, _natfun(args.R, "--R"), _natfun(args.G, "--G"), k)
    _require(args, "f")
    f = _natfun(args.f, "--f")
    if fn == "proj1":
        return B.proj1_bound(ctx, k, f)
    if fn == "proj2":
        return B.proj2_bound(ctx, k, f)
    if fn == "psi":
        return B.psi(ctx, k, f)
    if fn == "Psi":
        return B.Psi(ctx, k, f)
    return B.phi(int(fn[-1]), ctx, k, f)


def cmd_bound(args) -> int:
    sc = load_scenario(args.scenario)
    try:
        bv = evaluate_bound(sc, args)
    except BudgetExceeded as exc:
        out = {"functional": args.functional, "mode": args.mode, "error": "budget exceeded",
               "message": str(exc), "trace": exc.trace}
        print(_dump(out))
        return EXIT_BUDGET
    print(_dump(bv.to_json()))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def run_suite(sc, suite: str, k: int, f, seed: int, trials: int, horizon: int) -> list:
    reps = []
    if suite in ("operators", "all"):
        reps += V.operator_suite(1000, seed)
        reps.append(V.check_variational_inequality(sc.operator, sc.x0, 1000, seed))
        reps[-1].name = "scenario:variational_inequality"
    if suite in ("regularity", "all"):
        H = min(horizon, sc.horizon)
        traj = it.run(sc, H)
        reps += V.regularity_checks(sc, kmax=k, horizon=H, traj=traj)
        vi = V.check_variational_inequality(sc.operator, sc.x0, 1000, seed, traj=traj, k=k)
        vi.name = "scenario:variational_inequality_tail"
        reps.append(vi)
    if suite in ("metastability", "all"):
        H = min(horizon, sc.horizon)
        try:
            reps.append(V.check_bound_soundness(sc, k, f, H))
        except HorizonExhausted as exc:
            r = V.CheckReport("metastability").fail({"k": k, "horizon": H}, str(exc))
            reps.append(r)
    if suite in ("lemmas", "all"):
        reps += V.lemma_suites(trials, seed)
    return reps


def write_reports(reps, out: Path, meta: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    doc = {"meta": meta, "checks": [r.to_json() for r in reps],
           "passed": all(r.passed for r in reps)}
    (out / REPORT_JSON).write_text(_dump(doc) + "\n")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "passed", "checked", "vacuous", "max_slack", "counterexample"])
    for r in reps:
        j = r.to_json()
        w.writerow([j["name"], int(j["passed"]), j["checked"], j["vacuous"], repr(j["max_slack"]),
                    json.dumps(j["counterexample"], sort_keys=True)])
    (out / SUMMARY_CSV).write_text(buf.getvalue())


def cmd_verify(args) -> int:
    sc = load_scenario(args.scenario)
    f = _natfun(args.f, "--f")
    if args.k < 0 or args.trials < 1 or args.horizon < 1:
        raise InvalidScenario("--k must be >= 0, --trials and --horizon >= 1")
    reps = run_suite(sc, args.suite, args.k, f, args.seed, args.trials, args.horizon)
    meta = {"scenario": str(args.scenario), "suite": args.suite, "k": args.k, "f": f.spec(),
            "seed": args.seed, "trials": args.trials, "horizon": args.horizon}
    write_reports(reps, Path(args.out), meta)
    failed = [r for r in reps if not r.passed]
    for r in reps:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} checked={r.checked} vacuous={r.vacuous}")
    for r in reps:
        if r.name.startswith("metastability") and "n_star" in r.details:
            print(f"witness n*={r.details['n_star']} vacuous_margin={r.details['vacuous_margin']}")
    if failed:
        print("failures: " + ", ".join(r.name for r in failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metastab", description="Halpern proximal point rates and checks")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="write a trajectory CSV")
    r.add_argument("scenario")
    r.add_argument("--steps", type=int, default=100)
    r.add_argument("--gamma", type=float, default=1.0)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bound", help="evaluate a bound functional")
    b.add_argument("scenario")
    b.add_argument("--functional", required=True, choices=B.FUNCTIONALS)
    b.add_argument("--k", type=int)
    b.add_argument("--f")
    b.add_argument("--n", type=int)
    b.add_argument("--R", help="rate for the r-sequence (theta only)")
    b.add_argument("--G", help="Cauchy rate for the error sums (theta only)")
    b.add_argument("--mode", choices=("exact", "magnitude"), default="exact")
    b.set_defaults(func=cmd_bound)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("scenario")
    v.add_argument("--suite", choices=SUITES, default="all")
    v.add_argument("--k", type=int, default=9)
    v.add_argument("--f", default="affine:2,0")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--horizon", type=int, default=10**4)
    v.add_argument("--out", default="metastab-report")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    if getattr(args, "k", None) is not None and args.k < 0:
        print("error: --k must be >= 0", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except (InvalidScenario, DimensionMismatch, WitnessInvalid) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NonFiniteNumeric as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
