"""Command line entry point: solve, validate and derive-demand."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .benders import ModelInfeasibleError
from .dispatch import SchemaError, derive_demand_from_dispatch, read_dispatch_csv
from .io import ParseError, load_system
from .model import InvariantError
from .scenario import ScenarioConfig, infer_scenario, run_scenario, validate_dispatch

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chpuc", description="CHP unit commitment with PEV parking lots")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one scenario and write the report files")
    s.add_argument("--system", required=True, type=Path)
    s.add_argument("--scenario", required=True, type=int, choices=(1, 2, 3))
    s.add_argument("--out", required=True, type=Path)
    s.add_argument("--tol", type=float, default=1e-4)
    s.add_argument("--max-outer", type=int, default=200)
    s.add_argument("--max-inner", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--min-dsch", default=None, help="'table3', 'none' or a CSV of hour,min_count")
    s.add_argument("--baseline", type=float, default=None, help="scenario-1 cost to compare against")
    s.add_argument("--quiet", action="store_true")

    v = sub.add_parser("validate", help="replay a dispatch table against the constraints")
    v.add_argument("--system", required=True, type=Path)
    v.add_argument("--dispatch", required=True, type=Path)
    v.add_argument("--profile", choices=("solver", "paper-replay"), default="paper-replay")
    v.add_argument("--min-dsch", default=None, help="'table3', 'none' or a CSV of hour,min_count")

    d = sub.add_parser("derive-demand", help="reconstruct the demand profile from a dispatch table")
    d.add_argument("--dispatch", required=True, type=Path)
    d.add_argument("--out", required=True, type=Path)
    d.add_argument("--reserve-fraction", type=float, default=0.10)
    return ap


def _solve(args) -> int:
    system = load_system(args.system)
    kw = {}
    if args.min_dsch is not None:
        kw["min_dsch"] = args.min_dsch
    config = ScenarioConfig(args.scenario, tol=args.tol, max_outer=args.max_outer, max_inner=args.max_inner,
                            seed=args.seed, **kw)
    res = run_scenario(system, config, out_dir=args.out, baseline=args.baseline)
    if not args.quiet:
        print(res.files["summary"].read_text(), end="")
        for viol in res.report:
            print(viol)
    return res.exit_code


def _validate(args) -> int:
    system = load_system(args.system)
    config = None
    if args.min_dsch is not None:
        config = ScenarioConfig(infer_scenario(read_dispatch_csv(args.dispatch)), min_dsch=args.min_dsch)
    report = validate_dispatch(system, args.dispatch, args.profile, config)
    for viol in report:
        print(viol)
    print(f"{len(report)} violation(s) at the {args.profile} profile")
    return EXIT_OK if report.feasible else EXIT_FAIL


def _derive(args) -> int:
    table = read_dispatch_csv(args.dispatch)
    d = derive_demand_from_dispatch(table, reserve_fraction=args.reserve_fraction)
    lines = ["hour,pd,hd,rd"] + [f"{t + 1},{d.pd[t]:.6g},{d.hd[t]:.6g},{d.rd[t]:.6g}" for t in range(d.horizon)]
    args.out.write_text("\n".join(lines) + "\n")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return {"solve": _solve, "validate": _validate, "derive-demand": _derive}[args.command](args)
    except (ParseError, SchemaError, InvariantError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ModelInfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
