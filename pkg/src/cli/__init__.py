"""Command-line sub-commands; each module registers its parser and a `run` handler."""
from src.cli import evaluate, grid, gradcheck, synth, train

COMMANDS = [synth, train, evaluate, grid, gradcheck]

__all__ = ["COMMANDS"]
