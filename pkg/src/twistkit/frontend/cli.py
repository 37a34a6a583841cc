"""Command-line interface.

Every subcommand loads a problem file; `run` executes the tasks it declares,
the others synthesize a single task from flags.  Exit codes: 0 when all tasks
pass, 1 when any fails, 2 when any errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import TwistkitError
from .execute import execute
from .problem import Task, parse_problem
from .report import render_report


def _common(parser):
    parser.add_argument("file", help="problem file (.twist)")
    parser.add_argument("--order", type=int, default=None, help="prolongation order")
    parser.add_argument(
        "--mode",
        choices=["standard", "lambda", "mu"],
        default=None,
        help="prolongation mode",
    )
    parser.add_argument(
        "--format",
        choices=["human", "structured"],
        default="human",
        help="report format",
    )
    parser.add_argument("--seed", type=int, default=0, help="oracle sampling seed")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="twistkit",
        description="exact verification of twisted symmetries, coverings and gauge structures",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute every task in the file")
    _common(p)

    p = sub.add_parser("prolong", help="print prolongation coefficients of a field")
    _common(p)
    p.add_argument("--field", required=True)
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--mu", dest="mu")

    p = sub.add_parser("check-symmetry", help="verify a (twisted) symmetry of an equation")
    _common(p)
    p.add_argument("--field", required=True)
    p.add_argument("--equation")
    p.add_argument("--covering", help="check in the augmented space instead")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--mu", dest="mu")

    p = sub.add_parser("check-covering", help="verify covering compatibility")
    _common(p)
    p.add_argument("--covering", required=True)

    p = sub.add_parser("check-matrix-covering", help="verify a zero-curvature covering")
    _common(p)
    p.add_argument("--matrix-covering", dest="matrix_covering", required=True)

    p = sub.add_parser("check-mch", help="horizontal Maurer-Cartan residuals of a mu")
    _common(p)
    p.add_argument("--mu", required=True)

    p = sub.add_parser("gauge-diagram", help="verify the gauge/prolongation square")
    _common(p)
    p.add_argument("--gauge", required=True)
    p.add_argument("--field", required=True)

    p = sub.add_parser("reconstruct", help="project a covering symmetry onto a twisted one")
    _common(p)
    p.add_argument("--field", required=True)
    p.add_argument("--covering", required=True)
    p.add_argument("--target", choices=["lambda"], default="lambda")
    return ap


def _synthesize_task(args) -> Task | None:
    cmd = args.command
    if cmd == "run":
        return None
    params = {}
    if getattr(args, "field", None):
        params["field"] = args.field
    if getattr(args, "equation", None):
        params["equation"] = args.equation
    if getattr(args, "covering", None):
        params["covering"] = args.covering
    if getattr(args, "matrix_covering", None):
        params["matrix-covering"] = args.matrix_covering
    if getattr(args, "mu", None):
        params["mu"] = args.mu
    if getattr(args, "lam", None):
        params["lambda"] = args.lam
    if getattr(args, "gauge", None):
        params["gauge"] = args.gauge
    if getattr(args, "target", None) and cmd == "reconstruct":
        params["target"] = args.target
    if args.order is not None:
        params["order"] = str(args.order)
    if args.mode is not None:
        params["mode"] = args.mode
    kind = cmd
    if cmd == "check-symmetry":
        if params.get("covering"):
            kind = "check-augmented-symmetry"
            params.pop("equation", None)
        elif not params.get("equation"):
            raise TwistkitError("check-symmetry needs --equation (or --covering)")
        if params.get("mode") is None and params.get("lambda"):
            params["mode"] = "lambda"
        if params.get("mode") is None and params.get("mu"):
            params["mode"] = "mu"
    return Task(kind=kind, params=params)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        src = Path(args.file).read_text(encoding="utf-8")
    except OSError as e:
        print(f"error: cannot read {args.file}: {e}", file=sys.stderr)
        return 2
    try:
        doc = parse_problem(src)
        task = _synthesize_task(args)
    except TwistkitError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if task is not None:
        doc.tasks = [task]
    report = execute(doc, seed=args.seed)
    sys.stdout.write(render_report(report, args.format))
    return report.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
