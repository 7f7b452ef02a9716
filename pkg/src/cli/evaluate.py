"""`eval`: score a checkpoint's test split against its validation bank."""
import argparse

from src.workers.runs import evaluate_checkpoint


def register(subparsers) -> None:
    parser = subparsers.add_parser("eval", help="Evaluate a checkpoint")
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--manifest", help="Default: the manifest recorded in the checkpoint")
    parser.add_argument("--out", help="Default: the checkpoint's directory")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    outcome = evaluate_checkpoint(args.checkpoint, args.manifest, args.out)
    print(outcome.report.model_dump_json(indent=2))
    return 0
