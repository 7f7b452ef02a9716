"""Semantic matching: nearest-prototype classification trained with match and diversity losses."""
from typing import Any, Sequence

import numpy as np

from src.evaluation.scoring import classify_batch
from src.methods.base import TuningMethod
from src.models.encoder import EncoderModel
from src.models.prototypes import ClassPrototypeSet, compute_prototypes
from src.numerics.tensor import Tensor
from src.schemas.enums import TuningMethodName
from src.schemas.training import LossWeights
from src.training.losses import diversity_loss, joint_loss, match_loss


class SemanticMatchingMethod(TuningMethod):
    """
    Trains LoRA adapters and soft prompt tokens with λ·L_Diversity + L_Match.

    Prototypes are recomputed from the current parameters on every call; nothing
    is cached across optimizer steps.
    """

    name = TuningMethodName.SEMANTIC_MATCHING

    def __init__(
        self,
        model: EncoderModel,
        prototypes: ClassPrototypeSet,
        weights: LossWeights,
    ):
        super().__init__(model, prototypes.classes, weights)
        self.prototypes = prototypes

    def component_parameters(self) -> dict[str, Tensor]:
        return self.prototypes.parameters()

    def prototype_matrix(self) -> Tensor:
        return compute_prototypes(self.prototypes, self.model)

    def batch_loss(self, reps: Tensor, targets: Sequence[int]) -> tuple[Tensor, dict[str, float]]:
        protos = self.prototype_matrix()
        match = match_loss(reps, protos, list(targets), self.weights.tau)
        diversity = diversity_loss(protos)
        loss = joint_loss(match, diversity, self.weights.lambda_)
        return loss, {"match": match.item(), "diversity": diversity.item()}

    def predict(self, reps: np.ndarray) -> np.ndarray:
        return classify_batch(reps, self.prototype_matrix().data)

    def checkpoint_info(self) -> dict[str, Any]:
        return {
            **super().checkpoint_info(),
            "variant": self.prototypes.variant.value,
            "soft_tokens": self.prototypes.num_soft_tokens,
            "shared_soft_tokens": self.prototypes.shared,
            "name_token_ids": self.prototypes.name_token_ids,
        }
