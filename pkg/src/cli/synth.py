"""`synth`: write a synthetic corpus (manifest plus JSONL splits)."""
import argparse
import logging

from src.data.synth import SYNTH_SCENARIO, synth_corpus, write_corpus

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("synth", help="Generate a synthetic intent corpus")
    parser.add_argument("--k-id", type=int, default=8, help="ID classes")
    parser.add_argument("--k-ood", type=int, default=8, help="OOD classes")
    parser.add_argument("--per-class", type=int, default=40, help="Train rows per ID class")
    parser.add_argument("--val-per-class", type=int, help="Default: per-class // 2")
    parser.add_argument("--test-per-class", type=int, help="Default: per-class // 2")
    parser.add_argument(
        "--vocab-size", type=int, default=180, help="Word list size, split into the class pools"
    )
    parser.add_argument("--overlap", type=float, default=0.5)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--scenario", default=SYNTH_SCENARIO)
    parser.add_argument("--out", required=True, help="Corpus directory")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    manifest, corpus = synth_corpus(
        k_id=args.k_id,
        k_ood=args.k_ood,
        per_class=args.per_class,
        vocab_size=args.vocab_size,
        overlap=args.overlap,
        seed=args.seed,
        val_per_class=args.val_per_class,
        test_per_class=args.test_per_class,
        scenario=args.scenario,
    )
    path = write_corpus(manifest, corpus, args.out)
    print(path)
    return 0
