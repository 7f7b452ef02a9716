"""Enumerations shared by schemas, models and the CLI."""
import enum as python_enum


class PrototypeVariant(str, python_enum.Enum):
    """How class sequences [S]_1…[S]_M[NAME] are initialized."""

    SCENARIO = "scenario"
    RANDOM_NAME = "random-name"
    RANDOM = "random"
    NAME_ONLY = "name-only"

    @property
    def has_soft_tokens(self) -> bool:
        return self is not PrototypeVariant.NAME_ONLY

    @property
    def has_name_tokens(self) -> bool:
        return self is not PrototypeVariant.RANDOM


class TuningMethodName(str, python_enum.Enum):
    """Fine-tuning objective."""

    SEMANTIC_MATCHING = "semantic-matching"
    DISCRIMINATIVE = "discriminative"


class RepLayer(str, python_enum.Enum):
    """Which block output feeds the last-token representation."""

    FINAL = "final"
    PENULTIMATE = "penultimate"


class Split(str, python_enum.Enum):
    """Corpus split tag."""

    TRAIN = "train"
    VAL = "val"
    TEST = "test"
