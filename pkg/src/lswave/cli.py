"""Command-line driver writing convergence tables as CSV."""

from __future__ import annotations

import argparse
import sys

from .adapt import fitted_slope, run_study
from .problems import BENCHMARKS, get_problem
from .solver import SolverError

CSV_HEADER = "step,ndof,nelem,eta,err_v,err_sigma,err_V,seconds"


def _fmt(value) -> str:
    return "" if value is None else repr(value)


def records_to_csv(records) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join([str(r.step), str(r.n_dofs), str(r.n_elements),
                               _fmt(r.eta), _fmt(r.err_v_L2), _fmt(r.err_sigma_L2),
                               _fmt(r.err_V), _fmt(r.seconds)]))
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lswave",
        description="Space-time least-squares FEM for the 1D acoustic wave system")
    parser.add_argument("--problem", choices=BENCHMARKS, default="smooth1d")
    parser.add_argument("--order", type=int, choices=(1, 2, 3), default=1)
    parser.add_argument("--mode", choices=("uniform", "adaptive"), default="uniform")
    parser.add_argument("--theta", type=float, default=0.25)
    parser.add_argument("--max-dofs", type=int, default=100000)
    parser.add_argument("--initial-n", type=int, default=2)
    parser.add_argument("--out", default="study.csv")
    parser.add_argument("--quad-order", type=int, default=None)
    return parser


def run(args) -> int:
    if not 0 < args.theta < 1:
        print("error: --theta must lie in (0,1)", file=sys.stderr)
        return 2
    if args.initial_n < 1:
        print("error: --initial-n must be >= 1", file=sys.stderr)
        return 2
    problem = get_problem(args.problem)
    try:
        records = run_study(problem, p=args.order, mode=args.mode, theta=args.theta,
                            max_dofs=args.max_dofs, initial_n=args.initial_n,
                            quad_order=args.quad_order)
    except ValueError as exc:
        print(f"error: --max-dofs/--initial-n invalid: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"error: solver failed: {exc}", file=sys.stderr)
        return 1
    try:
        with open(args.out, "w") as handle:
            handle.write(records_to_csv(records))
    except OSError as exc:
        print(f"error: cannot write --out {args.out!r}: {exc}", file=sys.stderr)
        return 1
    slope = fitted_slope(records) if len(records) >= 2 else float("nan")
    print(f"wrote {args.out} ({len(records)} steps); "
          f"final slope of log eta vs log ndof: {slope:.4f}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
