"""Abstract base class for fine-tuning methods."""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from src.models.encoder import EncoderModel
from src.numerics import ops
from src.numerics.tensor import Tensor
from src.schemas.enums import TuningMethodName
from src.schemas.training import LossWeights


@dataclass(frozen=True)
class ValidationResult:
    """Epoch-end validation objective, its components and ID accuracy."""

    loss: float
    match: float
    diversity: float
    accuracy: float


class TuningMethod(ABC):
    """
    A fine-tuning objective over the LoRA-adapted encoder.

    Each method owns the encoder plus its own trainable component (class
    prototypes or a classifier head), defines the training loss of a batch and
    the ID decision rule used for validation accuracy and test classification.
    """

    name: TuningMethodName

    def __init__(self, model: EncoderModel, classes: Sequence[str], weights: LossWeights):
        self.model = model
        self.classes = list(classes)
        self.weights = weights

    # ─── Parameters ─────────────────────────────────────────────────────

    @abstractmethod
    def component_parameters(self) -> dict[str, Tensor]:
        """Trainable tensors of the method's own component, keyed by checkpoint name."""
        pass

    def parameters(self) -> dict[str, Tensor]:
        """Every trainable tensor: LoRA adapters plus the method's component."""
        return {**self.model.trainable_parameters(), **self.component_parameters()}

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.parameters().items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for name, tensor in self.parameters().items():
            tensor.data[...] = state[name]

    def checkpoint_tensors(self) -> dict[str, np.ndarray]:
        """Full encoder state plus the method's component."""
        return {**self.model.state_dict(), **self.state_dict()}

    def checkpoint_info(self) -> dict[str, Any]:
        return {"method": self.name.value, "classes": self.classes}

    # ─── Objective ──────────────────────────────────────────────────────

    def encode(self, samples: Sequence[Sequence[int]]) -> Tensor:
        """B×d representations of token-id sequences, recorded on the active tape."""
        return ops.stack([self.model.encode_tokens(tokens) for tokens in samples], axis=0)

    @abstractmethod
    def batch_loss(self, reps: Tensor, targets: Sequence[int]) -> tuple[Tensor, dict[str, float]]:
        """
        Training loss of a batch.

        Args:
            reps: B×d representations
            targets: B class indices

        Returns:
            Scalar loss tensor and its named components
        """
        pass

    @abstractmethod
    def predict(self, reps: np.ndarray) -> np.ndarray:
        """ID class index for every row of an N×d representation matrix."""
        pass

    def validate(
        self, sequences: Sequence[Sequence[int]], targets: Sequence[int]
    ) -> ValidationResult:
        """Full objective and accuracy on a validation split, without recording a tape."""
        reps = self.model.encode_batch(sequences)
        loss, parts = self.batch_loss(Tensor._wrap(reps), targets)
        accuracy = float(np.mean(self.predict(reps) == np.asarray(targets)))
        return ValidationResult(
            loss=loss.item(),
            match=parts["match"],
            diversity=parts["diversity"],
            accuracy=accuracy,
        )
