"""`train`: few-shot sample, fine-tune and checkpoint one run per seed."""
import argparse
import logging

from src.cli.options import add_spec_arguments, resolve_spec
from src.workers.runs import train_run

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="Fine-tune one run and write its checkpoint")
    add_spec_arguments(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    spec, _ = resolve_spec(args)
    for seed in spec.seeds:
        trained = train_run(spec, seed)
        logger.info(
            f"Run {trained.run_id}: best epoch {trained.result.best_epoch}, "
            f"val loss {trained.result.best_val_loss:.6f}"
        )
        print(trained.checkpoint)
    return 0
