"""Pydantic schema for the encoder configuration."""
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.schemas.enums import RepLayer


class EncoderConfig(BaseModel):
    """Tiny LLaMA-family encoder with LoRA on the attention projections."""

    model_config = ConfigDict(frozen=True)

    vocab_size: int = Field(ge=1)
    embed_dim: int = Field(default=64, ge=2)
    n_layers: int = Field(default=2, ge=1)
    n_heads: int = Field(default=4, ge=1)
    mlp_ratio: int = Field(default=4, ge=1)
    lora_rank: int = Field(default=4, ge=1)
    lora_alpha: float = Field(default=4.0, gt=0)
    max_seq_len: int = Field(default=64, ge=1)
    rep_layer: RepLayer = RepLayer.FINAL
    rope_base: float = 10000.0
    backbone_seed: int = 0

    @model_validator(mode="after")
    def _check_geometry(self) -> "EncoderConfig":
        if self.embed_dim % self.n_heads:
            raise ValueError(
                f"embed_dim {self.embed_dim} must be divisible by n_heads {self.n_heads}"
            )
        if (self.embed_dim // self.n_heads) % 2:
            raise ValueError("head dimension must be even for rotary position encoding")
        if self.lora_rank > self.embed_dim:
            raise ValueError(f"lora_rank {self.lora_rank} exceeds embed_dim {self.embed_dim}")
        if self.rep_layer is RepLayer.PENULTIMATE and self.n_layers < 2:
            raise ValueError("rep_layer=penultimate needs at least two layers")
        return self

    @property
    def head_dim(self) -> int:
        return self.embed_dim // self.n_heads

    @property
    def lora_scale(self) -> float:
        return self.lora_alpha / self.lora_rank
