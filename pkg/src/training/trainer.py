"""Epoch loop: shuffled mini-batches, AdamW steps, best-validation selection."""
import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from src.data.corpus import LabeledCorpus
from src.exceptions import DivergenceError, StateError
from src.numerics.tensor import Tape, backward
from src.schemas.enums import Split
from src.schemas.training import EpochRecord, TrainConfig
from src.training.optimizer import TrainState, adamw_step, lr_at_step, total_steps

if TYPE_CHECKING:
    from src.methods.base import TuningMethod

logger = logging.getLogger(__name__)


@dataclass
class TrainResult:
    """Best snapshot (trainable tensors) and the per-epoch log."""

    snapshot: dict[str, np.ndarray]
    best_epoch: int
    best_val_loss: float
    log: list[EpochRecord] = field(default_factory=list)
    first_train_loss: float = math.nan


def epoch_order(seed: int, epoch: int, size: int) -> np.ndarray:
    """Sample order of one epoch, derived from (seed, epoch) only."""
    return np.random.default_rng([seed, epoch]).permutation(size)


def train(corpus: LabeledCorpus, method: "TuningMethod", config: TrainConfig) -> TrainResult:
    """
    Fine-tune `method` on the corpus' train split, selecting on its val split.

    Every step recomputes the method's loss from current parameters (for semantic
    matching that includes the prototypes), backpropagates, and applies AdamW
    with the linearly decayed learning rate. After each epoch the full objective
    is evaluated on validation; the lowest-loss state is snapshotted and restored
    into `method` before returning.

    Raises:
        StateError: If the train or validation split is empty
        DivergenceError: If a training loss is not finite
    """
    train_set = corpus.split(Split.TRAIN)
    val_set = corpus.split(Split.VAL)
    if not train_set or not val_set:
        raise StateError(
            f"Training needs non-empty train and val splits, "
            f"got {len(train_set)} and {len(val_set)}"
        )
    train_targets = corpus.labels(train_set)
    val_tokens = [s.token_ids for s in val_set]
    val_targets = corpus.labels(val_set)

    batch_size = config.batch_size
    if batch_size > len(train_set):
        logger.warning(f"batch_size {batch_size} clipped to train size {len(train_set)}")
        batch_size = len(train_set)
    steps = total_steps(config.epochs, len(train_set), batch_size)
    params = method.parameters()
    state = TrainState()
    log: list[EpochRecord] = []
    first_loss = math.nan
    lr = config.lr

    logger.info(
        f"Training {method.name.value}: {len(train_set)} train, {len(val_set)} val, "
        f"{config.epochs} epochs, {steps} steps, {len(params)} trainable tensors"
    )
    for epoch in range(1, config.epochs + 1):
        order = epoch_order(config.seed, epoch, len(train_set))
        batch_losses = []
        for start in range(0, len(order), batch_size):
            idx = order[start : start + batch_size]
            lr = lr_at_step(state.step, steps, config.lr)
            for tensor in params.values():
                tensor.zero_grad()
            with Tape():
                reps = method.encode([train_set[i].token_ids for i in idx])
                loss, _ = method.batch_loss(reps, [train_targets[i] for i in idx])
            value = loss.item()
            if not math.isfinite(value):
                logger.error(f"Non-finite loss {value} at step {state.step}")
                raise DivergenceError(f"Loss diverged at step {state.step}: {value}", state.step)
            if math.isnan(first_loss):
                first_loss = value
            backward(loss)
            adamw_step(params, {n: t.grad for n, t in params.items()}, state, lr, config)
            batch_losses.append(value)

        val = method.validate(val_tokens, val_targets)
        if not math.isfinite(val.loss):
            raise DivergenceError(f"Validation loss diverged after epoch {epoch}", state.step)
        improved = state.offer(epoch, val.loss, method.state_dict())
        record = EpochRecord(
            epoch=epoch,
            train_loss=math.fsum(batch_losses) / len(batch_losses),
            val_loss=val.loss,
            val_match=val.match,
            val_diversity=val.diversity,
            val_acc=val.accuracy,
            lr=lr,
            best=improved,
        )
        log.append(record)
        logger.info(
            f"Epoch {epoch}: train {record.train_loss:.4f} val {val.loss:.4f} "
            f"acc {val.accuracy:.3f}{' *' if improved else ''}"
        )

    method.load_state_dict(state.best_snapshot)
    return TrainResult(
        snapshot=state.best_snapshot,
        best_epoch=state.best_epoch,
        best_val_loss=state.best_val_loss,
        log=log,
        first_train_loss=first_loss,
    )
