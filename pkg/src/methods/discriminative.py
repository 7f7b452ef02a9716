"""Discriminative baseline: linear head over the last-token representation."""
from typing import Sequence

import numpy as np

from src.methods.base import TuningMethod
from src.models.encoder import EncoderModel
from src.models.head import ClassifierHead
from src.numerics.tensor import Tensor
from src.schemas.enums import TuningMethodName
from src.schemas.training import LossWeights
from src.training.losses import discriminative_loss


class DiscriminativeMethod(TuningMethod):
    """Trains LoRA adapters and a K×d head with softmax cross-entropy."""

    name = TuningMethodName.DISCRIMINATIVE

    def __init__(
        self,
        model: EncoderModel,
        classes: Sequence[str],
        weights: LossWeights,
        seed: int = 0,
    ):
        super().__init__(model, classes, weights)
        self.head = ClassifierHead(len(self.classes), model.config.embed_dim, seed=seed)

    def component_parameters(self) -> dict[str, Tensor]:
        return self.head.parameters()

    def batch_loss(self, reps: Tensor, targets: Sequence[int]) -> tuple[Tensor, dict[str, float]]:
        # No diversity term: the cross-entropy is reported as the match component
        loss = discriminative_loss(reps, self.head, list(targets))
        return loss, {"match": loss.item(), "diversity": 0.0}

    def predict(self, reps: np.ndarray) -> np.ndarray:
        logits = self.head(Tensor._wrap(np.atleast_2d(reps))).data
        return np.argmax(logits, axis=1)
