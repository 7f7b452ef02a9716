"""`gradcheck`: finite-difference suite over every differentiable building block."""
import argparse
import logging

from src.qa.gradcheck import DEFAULT_INSTANCES, GradientQAEngine

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("gradcheck", help="Check analytic gradients numerically")
    parser.add_argument("--instances", type=int, default=DEFAULT_INSTANCES)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--case", nargs="+", help="Only these cases")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    engine = GradientQAEngine(instances=args.instances, seed=args.seed)
    passed, failures = engine.evaluate(args.case)
    for failure in failures:
        logger.error(failure)
    print("gradcheck passed" if passed else f"gradcheck failed: {len(failures)} failures")
    return 0 if passed else 1
