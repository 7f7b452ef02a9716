"""Training objectives: prototype diversity, semantic matching, and the discriminative baseline."""
import math
from typing import Sequence

import numpy as np

from src.exceptions import DimensionError, NumericError
from src.models.head import ClassifierHead
from src.numerics import ops
from src.numerics.tensor import Tensor, as_tensor


def diversity_loss(prototypes: Tensor) -> Tensor:
    """
    (1/K²) Σ_i Σ_{j≠i} cos(p_i, p_j)²; exactly 0 for a single prototype.

    Raises:
        DegenerateVectorError: If a prototype row has (near) zero norm
    """
    prototypes = as_tensor(prototypes)
    k = prototypes.shape[0]
    off_diagonal = Tensor._wrap(1.0 - np.eye(k))
    sims = ops.pairwise_cosine(prototypes, prototypes)
    return ops.div(ops.sum(ops.mul(ops.square(sims), off_diagonal)), float(k * k))


def match_logits(z: Tensor, prototypes: Tensor, tau: float) -> Tensor:
    """cos(z, p_i)/τ for every prototype: K-vector for z (d,), B×K for a B×d batch."""
    z, prototypes = as_tensor(z), as_tensor(prototypes)
    if z.shape[-1] != prototypes.shape[1]:
        raise DimensionError(
            f"Representation shape {z.shape} does not match prototypes {prototypes.shape}"
        )
    if z.ndim == 1:
        rows = ops.reshape(z, (1, z.shape[0]))
        sims = ops.reshape(ops.pairwise_cosine(rows, prototypes), (prototypes.shape[0],))
    else:
        sims = ops.pairwise_cosine(z, prototypes)
    return ops.div(sims, tau)


def match_loss(z: Tensor, prototypes: Tensor, target, tau: float) -> Tensor:
    """
    −log softmax(cos(z, P)/τ)[target], via max-shifted log-sum-exp.

    A B×d batch with B targets gives the batch mean.

    Raises:
        TargetIndexError: If a target is outside [0, K)
        DegenerateVectorError: If z or a prototype has (near) zero norm
    """
    return ops.softmax_cross_entropy(match_logits(z, prototypes, tau), target)


def match_probabilities(z: np.ndarray, prototypes: np.ndarray, tau: float) -> np.ndarray:
    """Class probabilities the match loss assigns to a single representation."""
    logits = match_logits(Tensor._wrap(z), Tensor._wrap(prototypes), tau).data
    shifted = np.exp(logits - logits.max())
    return shifted / shifted.sum()


def joint_loss(match, diversity, lambda_: float):
    """
    λ·diversity + match. Tensors in, Tensor out; floats in, float out.

    Raises:
        NumericError: If either term is not finite
    """
    for label, term in (("match", match), ("diversity", diversity)):
        value = term.data if isinstance(term, Tensor) else np.asarray(term)
        if not np.all(np.isfinite(value)):
            raise NumericError(f"Non-finite {label} term: {value}")
    if isinstance(match, Tensor) or isinstance(diversity, Tensor):
        return ops.add(ops.mul(diversity, lambda_), match)
    result = lambda_ * float(diversity) + float(match)
    if not math.isfinite(result):
        raise NumericError(f"Joint loss overflowed: {result}")
    return result


def discriminative_loss(z: Tensor, head: ClassifierHead, target: int | Sequence[int]) -> Tensor:
    """Softmax cross-entropy over head logits W·z + b (batch mean for a B×d input)."""
    return ops.softmax_cross_entropy(head(as_tensor(z)), target)
