"""AdamW with decoupled weight decay and a linear learning-rate schedule."""
import math
from dataclasses import dataclass, field

import numpy as np

from src.exceptions import OptimizerError, ScheduleError
from src.numerics.tensor import Tensor
from src.schemas.training import TrainConfig


def lr_at_step(step: int, total_steps: int, base_lr: float) -> float:
    """
    base_lr · (1 − step/total_steps), decaying from step 0 without warmup.

    Raises:
        ScheduleError: If total_steps < 1 or step is outside [0, total_steps]
    """
    if total_steps < 1:
        raise ScheduleError(f"total_steps must be >= 1, got {total_steps}")
    if not 0 <= step <= total_steps:
        raise ScheduleError(f"step {step} outside schedule [0, {total_steps}]")
    return base_lr * (1.0 - step / total_steps)


def total_steps(epochs: int, train_size: int, batch_size: int) -> int:
    return epochs * math.ceil(train_size / batch_size)


@dataclass
class TrainState:
    """
    Optimizer moments plus best-validation bookkeeping.

    Moment buffers are created lazily for exactly the parameters passed to
    `adamw_step`, i.e. the trainable ones.
    """

    step: int = 0
    exp_avg: dict[str, np.ndarray] = field(default_factory=dict)
    exp_avg_sq: dict[str, np.ndarray] = field(default_factory=dict)
    best_val_loss: float = math.inf
    best_epoch: int | None = None
    best_snapshot: dict[str, np.ndarray] | None = None

    def offer(self, epoch: int, val_loss: float, snapshot: dict[str, np.ndarray]) -> bool:
        """Keep `snapshot` if `val_loss` is a strict improvement; returns whether it was kept."""
        if val_loss < self.best_val_loss:
            self.best_val_loss = val_loss
            self.best_epoch = epoch
            self.best_snapshot = {name: value.copy() for name, value in snapshot.items()}
            return True
        return False


def adamw_step(
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray | None],
    state: TrainState,
    lr: float,
    config: TrainConfig,
) -> None:
    """
    One bias-corrected AdamW update, in place.

    Decay is decoupled: p ← p·(1 − lr·wd) first, then p ← p − lr·m̂/(√v̂ + ε).

    Raises:
        OptimizerError: If a parameter has no gradient
    """
    missing = [name for name in params if grads.get(name) is None]
    if missing:
        raise OptimizerError(f"No gradient for trainable parameters: {missing}")

    state.step += 1
    beta1, beta2 = config.beta1, config.beta2
    bias1 = 1.0 - beta1**state.step
    bias2 = 1.0 - beta2**state.step
    for name, param in params.items():
        grad = grads[name]
        m = state.exp_avg.setdefault(name, np.zeros_like(param.data))
        v = state.exp_avg_sq.setdefault(name, np.zeros_like(param.data))
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad * grad
        if config.weight_decay:
            param.data *= 1.0 - lr * config.weight_decay
        param.data -= lr * (m / bias1) / (np.sqrt(v / bias2) + config.eps)
