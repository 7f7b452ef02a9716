"""Tiny causal transformer encoder g(·) with LoRA-adapted attention."""
import logging
from typing import Sequence

import numpy as np

from src.exceptions import DimensionError, LengthError, ShapeError, VocabError
from src.models.lora import LoraLinear
from src.numerics import ops
from src.numerics.tensor import Tensor
from src.schemas.encoder import EncoderConfig
from src.schemas.enums import RepLayer

logger = logging.getLogger(__name__)

INIT_STD = 0.02


def rope_tables(max_len: int, head_dim: int, base: float) -> tuple[np.ndarray, np.ndarray]:
    """Cosine/sine tables (max_len×head_dim) for rotate-half rotary encoding."""
    half = head_dim // 2
    freqs = 1.0 / (base ** (np.arange(half, dtype=np.float64) * 2.0 / head_dim))
    angles = np.outer(np.arange(max_len, dtype=np.float64), freqs)
    angles = np.concatenate([angles, angles], axis=1)
    return np.cos(angles), np.sin(angles)


def rotate_half_matrix(head_dim: int) -> np.ndarray:
    """R such that x @ R == concat(-x[half:], x[:half])."""
    half = head_dim // 2
    rot = np.zeros((head_dim, head_dim))
    rot[half:, :half] = -np.eye(half)
    rot[:half, half:] = np.eye(half)
    return rot


class CausalSelfAttention:
    """Multi-head causal attention; W_q, W_k, W_v, W_o are LoRA-adapted."""

    def __init__(self, config: EncoderConfig, prefix: str, base_rng, lora_rng):
        d = config.embed_dim
        self.config = config
        self.projections = {
            key: LoraLinear(
                base_rng.normal(0.0, INIT_STD, (d, d)),
                config.lora_rank,
                config.lora_alpha,
                lora_rng,
                name=f"{prefix}.attn.w_{key}",
            )
            for key in ("q", "k", "v", "o")
        }
        self.cos, self.sin = rope_tables(config.max_seq_len, config.head_dim, config.rope_base)
        self.rot = Tensor(rotate_half_matrix(config.head_dim))

    def _rotate(self, x: Tensor, length: int) -> Tensor:
        cos = Tensor._wrap(self.cos[:length])
        sin = Tensor._wrap(self.sin[:length])
        return ops.add(ops.mul(x, cos), ops.mul(ops.matmul(x, self.rot), sin))

    def __call__(self, x: Tensor) -> Tensor:
        length = x.shape[0]
        dh = self.config.head_dim
        q = self.projections["q"](x)
        k = self.projections["k"](x)
        v = self.projections["v"](x)
        mask = np.triu(np.ones((length, length), dtype=bool), k=1)
        heads = []
        for h in range(self.config.n_heads):
            cols = (slice(None), slice(h * dh, (h + 1) * dh))
            qh = self._rotate(ops.index(q, cols), length)
            kh = self._rotate(ops.index(k, cols), length)
            scores = ops.mul(ops.matmul(qh, ops.transpose(kh)), 1.0 / np.sqrt(dh))
            weights = ops.softmax(scores, axis=-1, mask=mask)
            heads.append(ops.matmul(weights, ops.index(v, cols)))
        return self.projections["o"](ops.concat(heads, axis=1))


class FeedForward:
    """Gated (SiLU) feed-forward block; frozen, no adapters."""

    def __init__(self, config: EncoderConfig, prefix: str, base_rng):
        d, hidden = config.embed_dim, config.embed_dim * config.mlp_ratio
        self.w1 = Tensor(base_rng.normal(0.0, INIT_STD, (hidden, d)), name=f"{prefix}.ffn.w1")
        self.w3 = Tensor(base_rng.normal(0.0, INIT_STD, (hidden, d)), name=f"{prefix}.ffn.w3")
        self.w2 = Tensor(base_rng.normal(0.0, INIT_STD, (d, hidden)), name=f"{prefix}.ffn.w2")

    def __call__(self, x: Tensor) -> Tensor:
        gated = ops.mul(ops.silu(ops.linear(x, self.w1)), ops.linear(x, self.w3))
        return ops.linear(gated, self.w2)


class TransformerBlock:
    """Pre-norm residual block: x + attn(norm(x)), then h + ffn(norm(h))."""

    def __init__(self, config: EncoderConfig, index: int, base_rng, lora_rng):
        prefix = f"layers.{index}"
        d = config.embed_dim
        self.attn_norm = Tensor(np.ones(d), name=f"{prefix}.attn_norm")
        self.attn = CausalSelfAttention(config, prefix, base_rng, lora_rng)
        self.ffn_norm = Tensor(np.ones(d), name=f"{prefix}.ffn_norm")
        self.ffn = FeedForward(config, prefix, base_rng)

    def __call__(self, x: Tensor) -> Tensor:
        h = ops.add(x, self.attn(ops.rms_norm(x, self.attn_norm)))
        return ops.add(h, self.ffn(ops.rms_norm(h, self.ffn_norm)))


class EncoderModel:
    """
    Token embeddings, causal transformer blocks, final RMS norm, last-token pooling.

    The backbone (embeddings, projections, feed-forward, norms) is drawn from a
    Gaussian seeded by `config.backbone_seed` and stays frozen. LoRA A matrices are
    drawn from `adapter_seed`; B matrices start at zero.
    """

    def __init__(self, config: EncoderConfig, adapter_seed: int = 0):
        self.config = config
        base_rng = np.random.default_rng(config.backbone_seed)
        lora_rng = np.random.default_rng(adapter_seed)
        self.embedding = Tensor(
            base_rng.normal(0.0, INIT_STD, (config.vocab_size, config.embed_dim)),
            name="embed.weight",
        )
        self.layers = [
            TransformerBlock(config, i, base_rng, lora_rng) for i in range(config.n_layers)
        ]
        self.final_norm = Tensor(np.ones(config.embed_dim), name="final_norm")

    # ─── Parameters ─────────────────────────────────────────────────────

    def lora_layers(self) -> list[LoraLinear]:
        return [proj for layer in self.layers for proj in layer.attn.projections.values()]

    def trainable_parameters(self) -> dict[str, Tensor]:
        params: dict[str, Tensor] = {}
        for proj in self.lora_layers():
            params.update(proj.trainable_parameters())
        return params

    def frozen_parameters(self) -> dict[str, Tensor]:
        params = {self.embedding.name: self.embedding, self.final_norm.name: self.final_norm}
        for layer in self.layers:
            params[layer.attn_norm.name] = layer.attn_norm
            params[layer.ffn_norm.name] = layer.ffn_norm
            for proj in layer.attn.projections.values():
                params.update(proj.frozen_parameters())
            for w in (layer.ffn.w1, layer.ffn.w2, layer.ffn.w3):
                params[w.name] = w
        return params

    def named_parameters(self) -> dict[str, Tensor]:
        return {**self.frozen_parameters(), **self.trainable_parameters()}

    def set_adapters_enabled(self, enabled: bool) -> None:
        for proj in self.lora_layers():
            proj.enabled = enabled

    # ─── Forward ────────────────────────────────────────────────────────

    def embed(self, tokens: Sequence[int]) -> Tensor:
        """
        Embedding rows for a token-id sequence (frozen table lookup).

        Raises:
            LengthError: If the sequence is empty
            VocabError: If an id is outside [0, vocab_size)
        """
        ids = np.asarray(list(tokens), dtype=np.int64)
        if ids.size == 0:
            raise LengthError("Token sequence is empty")
        if ids.min() < 0 or ids.max() >= self.config.vocab_size:
            raise VocabError(f"Token id out of vocabulary [0, {self.config.vocab_size})")
        return ops.index(self.embedding, ids)

    def hidden_states(self, embeds: Tensor) -> list[Tensor]:
        """
        Residual stream after each block, index 0 being the input embeddings.

        Raises:
            ShapeError: If embeds is not L×d
            LengthError: If L is 0 or exceeds max_seq_len
        """
        if embeds.ndim != 2 or embeds.shape[1] != self.config.embed_dim:
            raise ShapeError(
                f"Expected L×{self.config.embed_dim} embeddings, got shape {embeds.shape}"
            )
        if embeds.shape[0] == 0:
            raise LengthError("Embedding sequence is empty")
        if embeds.shape[0] > self.config.max_seq_len:
            raise LengthError(
                f"Sequence length {embeds.shape[0]} exceeds max_seq_len {self.config.max_seq_len}"
            )
        states = [embeds]
        for layer in self.layers:
            states.append(layer(states[-1]))
        return states

    def encode_embeddings(self, embeds: Tensor) -> Tensor:
        """Representation (d,) of an L×d embedding sequence: normed last-token state."""
        states = self.hidden_states(embeds)
        source = states[-1] if self.config.rep_layer is RepLayer.FINAL else states[-2]
        last = ops.index(source, (slice(source.shape[0] - 1, None), slice(None)))
        return ops.reshape(ops.rms_norm(last, self.final_norm), (self.config.embed_dim,))

    def encode_tokens(self, tokens: Sequence[int]) -> Tensor:
        """Representation (d,) of a token-id sequence; same path as encode_embeddings."""
        ids = list(tokens)
        if len(ids) > self.config.max_seq_len:
            raise LengthError(
                f"Sequence length {len(ids)} exceeds max_seq_len {self.config.max_seq_len}"
            )
        return self.encode_embeddings(self.embed(ids))

    def encode_batch(self, sequences: Sequence[Sequence[int]]) -> np.ndarray:
        """Inference-only representations, one row per sequence."""
        return np.stack([self.encode_tokens(seq).data for seq in sequences])

    # ─── State ──────────────────────────────────────────────────────────

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.named_parameters().items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        """
        Raises:
            DimensionError: If a tensor is missing or its shape differs
        """
        for name, tensor in self.named_parameters().items():
            if name not in state:
                raise DimensionError(f"Checkpoint is missing tensor {name}")
            if state[name].shape != tensor.shape:
                raise DimensionError(
                    f"Tensor {name}: checkpoint shape {state[name].shape} != model {tensor.shape}"
                )
            tensor.data[...] = state[name]


def encode_tokens(model: EncoderModel, tokens: Sequence[int]) -> Tensor:
    return model.encode_tokens(tokens)


def encode_embeddings(model: EncoderModel, embeds: Tensor) -> Tensor:
    return model.encode_embeddings(embeds)
