"""`grid`: train and evaluate every (cell, seed), aggregate means, emit plots."""
import argparse
import logging

from src.cli.options import add_axis_arguments, add_spec_arguments, resolve_spec
from src.workers.runs import run_grid

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("grid", help="Run a seed grid and write report.csv")
    add_spec_arguments(parser, multi_seed=True)
    add_axis_arguments(parser)
    parser.add_argument("--parallel", type=int, help="Concurrent runs (threads)")
    parser.add_argument("--no-progress", action="store_true", help="Hide the progress bar")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    spec, axes = resolve_spec(args)
    report = run_grid(spec, axes, parallel=args.parallel, progress=not args.no_progress)
    for row in report.means:
        print(
            f"{row.shot:>5} {row.method:<40} acc {row.id_acc:.4f} auroc {row.auroc:.4f} "
            f"far95 {row.far95:.4f} aupr {row.aupr:.4f}"
        )
    if report.failures:
        logger.warning(f"{len(report.failures)} runs failed, see report.json")
    return 0
