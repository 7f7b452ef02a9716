"""Tensor arithmetic with reverse-mode automatic differentiation."""
from src.numerics.gradcheck import GradCheckResult, check_gradients, numeric_gradient
from src.numerics.ops import (
    concat,
    cosine,
    cosine_values,
    linear,
    logsumexp,
    matmul,
    pairwise_cosine,
    rms_norm,
    silu,
    softmax,
    softmax_cross_entropy,
    stack,
)
from src.numerics.tensor import Tape, Tensor, active_tape, as_tensor, backward

__all__ = [
    "Tensor",
    "Tape",
    "active_tape",
    "as_tensor",
    "backward",
    "concat",
    "cosine",
    "cosine_values",
    "linear",
    "logsumexp",
    "matmul",
    "pairwise_cosine",
    "rms_norm",
    "silu",
    "softmax",
    "softmax_cross_entropy",
    "stack",
    "GradCheckResult",
    "check_gradients",
    "numeric_gradient",
]
