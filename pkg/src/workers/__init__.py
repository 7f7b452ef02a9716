"""Run execution: single runs, checkpoint evaluation and seed grids."""
from src.workers.runs import (
    RunOutcome,
    TrainedRun,
    build_method,
    evaluate_checkpoint,
    evaluate_method,
    prepare_corpus,
    resolve_seeds,
    run_grid,
    run_single,
    train_run,
)

__all__ = [
    "RunOutcome",
    "TrainedRun",
    "build_method",
    "evaluate_checkpoint",
    "evaluate_method",
    "prepare_corpus",
    "resolve_seeds",
    "run_grid",
    "run_single",
    "train_run",
]
