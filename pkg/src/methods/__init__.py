"""Fine-tuning methods."""
from typing import Sequence

from src.data.tokenizer import Vocabulary
from src.methods.base import TuningMethod, ValidationResult
from src.methods.discriminative import DiscriminativeMethod
from src.methods.semantic_matching import SemanticMatchingMethod
from src.models.encoder import EncoderModel
from src.models.prototypes import init_prototype_set
from src.schemas.enums import PrototypeVariant, TuningMethodName
from src.schemas.training import LossWeights


def get_method(
    method_name: str | TuningMethodName,
    model: EncoderModel,
    classes: Sequence[str],
    weights: LossWeights,
    *,
    vocab: Vocabulary | None = None,
    scenario: str = "",
    variant: PrototypeVariant = PrototypeVariant.SCENARIO,
    num_soft_tokens: int = 4,
    shared_soft_tokens: bool = False,
    seed: int = 0,
) -> TuningMethod:
    """
    Get the tuning method for a method name.

    Args:
        method_name: "semantic-matching" or "discriminative"
        model: Encoder to adapt
        classes: ID class names in index order
        weights: λ and τ
        vocab: Tokenizer for the scenario prompt and class names (semantic matching)
        scenario: Domain word of the prompt initialization
        variant: Prototype initialization variant
        num_soft_tokens: Learnable tokens per class
        shared_soft_tokens: One soft block for all classes
        seed: Seed of the random prototype or head initialization

    Returns:
        TuningMethod instance

    Raises:
        ValueError: If the method is not supported
    """
    name = TuningMethodName(method_name)

    if name is TuningMethodName.SEMANTIC_MATCHING:
        if vocab is None:
            raise ValueError("Semantic matching needs a vocabulary for class names")
        prototypes = init_prototype_set(
            classes,
            variant,
            scenario,
            num_soft_tokens,
            model,
            vocab=vocab,
            seed=seed,
            shared=shared_soft_tokens,
        )
        return SemanticMatchingMethod(model, prototypes, weights)
    elif name is TuningMethodName.DISCRIMINATIVE:
        return DiscriminativeMethod(model, classes, weights, seed=seed)
    else:
        raise ValueError(f"Unsupported method: {method_name}")


__all__ = [
    "TuningMethod",
    "ValidationResult",
    "SemanticMatchingMethod",
    "DiscriminativeMethod",
    "get_method",
]
