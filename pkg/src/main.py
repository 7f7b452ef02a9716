"""Command-line entry point for protomatch."""
import argparse
import logging
import sys

from src import __version__
from src.cli import COMMANDS
from src.config import configure_logging
from src.exceptions import ProtoMatchError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protomatch",
        description="Semantic-matching fine-tuning with class prototypes and OOD scoring",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Default: settings"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def run(argv: list[str] | None = None) -> int:
    """Parse `argv`, run the command and return the process exit status."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.func(args)
    except ProtoMatchError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception:
        logger.exception(f"Unexpected failure in {args.command}")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
