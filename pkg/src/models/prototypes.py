"""Learnable class sequences and the prototypes derived from them."""
import logging
from typing import Protocol, Sequence

import numpy as np

from src.exceptions import ConfigError, LengthError
from src.models.encoder import INIT_STD, EncoderModel
from src.numerics import ops
from src.numerics.tensor import Tensor
from src.schemas.enums import PrototypeVariant

logger = logging.getLogger(__name__)

SCENARIO_PROMPT = "{scenario} intent of"


class TextEncoder(Protocol):
    def encode(self, text: str) -> list[int]: ...


class ClassPrototypeSet:
    """
    Per-class sequences c_i = [S]_1 … [S]_M [NAME].

    `soft_tokens[i]` is the trainable M×d block of class i (the same Tensor object
    for every class when shared). Name tokens are looked up in the frozen
    embedding table at every forward pass.
    """

    def __init__(
        self,
        classes: Sequence[str],
        variant: PrototypeVariant,
        num_soft_tokens: int,
        soft_tokens: list[Tensor],
        name_token_ids: list[list[int]],
        shared: bool = False,
    ):
        self.classes = list(classes)
        self.variant = variant
        self.num_soft_tokens = num_soft_tokens
        self.soft_tokens = soft_tokens
        self.name_token_ids = name_token_ids
        self.shared = shared

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def sequence_length(self, index: int) -> int:
        return self.num_soft_tokens + len(self.name_token_ids[index])

    def parameters(self) -> dict[str, Tensor]:
        """Trainable soft-token blocks keyed by checkpoint name."""
        if not self.soft_tokens:
            return {}
        if self.shared:
            return {"proto.soft.shared": self.soft_tokens[0]}
        return {f"proto.soft.{i}": block for i, block in enumerate(self.soft_tokens)}

    def sequence_embeddings(self, index: int, model: EncoderModel) -> Tensor:
        """Soft-token rows followed by name-embedding rows for class `index`."""
        parts = []
        if self.soft_tokens:
            parts.append(self.soft_tokens[index])
        if self.name_token_ids[index]:
            parts.append(model.embed(self.name_token_ids[index]))
        return parts[0] if len(parts) == 1 else ops.concat(parts, axis=0)

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for name, tensor in self.parameters().items():
            tensor.data[...] = state[name]


def init_prototype_set(
    classes: Sequence[str],
    variant: PrototypeVariant,
    scenario: str,
    num_soft_tokens: int,
    model: EncoderModel,
    vocab: TextEncoder,
    seed: int = 0,
    shared: bool = False,
) -> ClassPrototypeSet:
    """
    Build the class sequences for one prototype variant.

    Scenario variant: every class's soft block starts as the embedding rows of
    "<scenario> intent of", cycled or truncated to M rows. Random variants draw each
    block from a Gaussian (std 0.02) seeded by `seed`. Name-only has no soft block.

    Args:
        classes: ID class names, index order defines class indices
        variant: Initialization variant
        scenario: Domain word used in the prompt (e.g. "banking")
        num_soft_tokens: M, the number of learnable tokens per class
        model: Encoder whose embedding table supplies prompt and name rows
        vocab: Tokenizer for the prompt and class names
        seed: Seed for random initialization
        shared: One soft block shared by all classes

    Raises:
        ConfigError: If classes is empty, M does not fit the variant, or a name is empty
    """
    if not classes:
        raise ConfigError("Cannot build prototypes for an empty class list")
    if variant is PrototypeVariant.NAME_ONLY and num_soft_tokens != 0:
        raise ConfigError(f"Variant name-only takes no soft tokens, got M={num_soft_tokens}")
    if variant.has_soft_tokens and num_soft_tokens < 1:
        raise ConfigError(f"Variant {variant.value} needs M >= 1, got M={num_soft_tokens}")

    name_ids: list[list[int]] = []
    for name in classes:
        ids = vocab.encode(name)
        if not ids:
            raise ConfigError(f"Class name {name!r} produces no tokens")
        name_ids.append(ids if variant.has_name_tokens else [])

    d = model.config.embed_dim
    blocks: list[Tensor] = []
    if variant is PrototypeVariant.SCENARIO:
        prompt_ids = vocab.encode(SCENARIO_PROMPT.format(scenario=scenario))
        cycled = [prompt_ids[j % len(prompt_ids)] for j in range(num_soft_tokens)]
        init = model.embedding.data[cycled]
        count = 1 if shared else len(classes)
        blocks = [
            Tensor(init, requires_grad=True, name=f"proto.soft.{i}") for i in range(count)
        ]
    elif variant.has_soft_tokens:
        rng = np.random.default_rng(seed)
        count = 1 if shared else len(classes)
        blocks = [
            Tensor(rng.normal(0.0, INIT_STD, (num_soft_tokens, d)), requires_grad=True,
                   name=f"proto.soft.{i}")
            for i in range(count)
        ]
    if shared and blocks:
        blocks = blocks * len(classes)

    prototypes = ClassPrototypeSet(classes, variant, num_soft_tokens, blocks, name_ids, shared)
    logger.info(
        f"Initialized {len(classes)} class sequences, variant={variant.value}, "
        f"M={num_soft_tokens}, shared={shared}"
    )
    return prototypes


def compute_prototypes(prototypes: ClassPrototypeSet, model: EncoderModel) -> Tensor:
    """
    p_i = g(c_i) for every class, stacked K×d; recomputed from current parameters.

    Raises:
        LengthError: If a class sequence exceeds the encoder's max_seq_len
    """
    rows = []
    for i in range(prototypes.num_classes):
        length = prototypes.sequence_length(i)
        if length > model.config.max_seq_len:
            raise LengthError(
                f"Class {prototypes.classes[i]!r} sequence has {length} tokens, "
                f"max_seq_len is {model.config.max_seq_len}"
            )
        rows.append(model.encode_embeddings(prototypes.sequence_embeddings(i, model)))
    return ops.stack(rows, axis=0)
