"""Training objectives, optimizer and the epoch loop."""
from src.training.losses import (
    discriminative_loss,
    diversity_loss,
    joint_loss,
    match_logits,
    match_loss,
    match_probabilities,
)
from src.training.optimizer import TrainState, adamw_step, lr_at_step, total_steps
from src.training.trainer import TrainResult, epoch_order, train

__all__ = [
    "diversity_loss",
    "discriminative_loss",
    "joint_loss",
    "match_logits",
    "match_loss",
    "match_probabilities",
    "TrainState",
    "adamw_step",
    "lr_at_step",
    "total_steps",
    "TrainResult",
    "epoch_order",
    "train",
]
