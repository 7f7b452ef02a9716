"""Pydantic schemas for runs and experiment reports."""
import hashlib
import itertools
import json
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.schemas.encoder import EncoderConfig
from src.schemas.enums import PrototypeVariant, RepLayer, TuningMethodName
from src.schemas.training import TrainConfig

Shots = int | Literal["full"]

DEFAULT_SOFT_TOKENS = 4


def format_lambda(value: float) -> str:
    """Shortest text that round-trips to the same float, so distinct λ never share a name."""
    return repr(float(value))


class RunSpec(BaseModel):
    """One fully resolved train+eval cell (before seeds are expanded)."""

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    manifest: str
    method: TuningMethodName = TuningMethodName.SEMANTIC_MATCHING
    shots: Shots = 5
    seeds: list[int] = Field(default_factory=lambda: [1, 2, 3, 4, 5], min_length=1)
    variant: PrototypeVariant = PrototypeVariant.SCENARIO
    lambda_: float = Field(default=0.2, ge=0.0, alias="lambda")
    # Sized for the small randomly initialized encoder; TrainConfig keeps 1e-4 and 0.01.
    tau: float = Field(default=0.1, gt=0.0)
    soft_tokens: int | None = Field(default=None, ge=0)
    shared_soft_tokens: bool = False
    bank_include_prototypes: bool = False

    lr: float = Field(default=1e-2, ge=0.0)
    epochs: int = Field(default=25, ge=1)
    batch_size: int = Field(default=16, ge=1)
    weight_decay: float = Field(default=0.01, ge=0.0)

    embed_dim: int = Field(default=64, ge=2)
    n_layers: int = Field(default=2, ge=1)
    n_heads: int = Field(default=4, ge=1)
    mlp_ratio: int = Field(default=4, ge=1)
    lora_rank: int = Field(default=4, ge=1)
    lora_alpha: float = Field(default=4.0, gt=0)
    max_seq_len: int = Field(default=64, ge=1)
    rep_layer: RepLayer = RepLayer.FINAL
    backbone_seed: int = 0

    out: str = "runs"

    @field_validator("shots")
    @classmethod
    def _check_shots(cls, v: Shots) -> Shots:
        if isinstance(v, int) and v < 1:
            raise ValueError(f"shots must be >= 1 or 'full', got {v}")
        return v

    @model_validator(mode="after")
    def _check_soft_tokens(self) -> "RunSpec":
        if self.variant is PrototypeVariant.NAME_ONLY and self.soft_tokens:
            raise ValueError("variant name-only takes no soft tokens")
        if self.variant.has_soft_tokens and self.soft_tokens == 0:
            raise ValueError(f"variant {self.variant.value} needs at least one soft token")
        return self

    @property
    def num_soft_tokens(self) -> int:
        if self.soft_tokens is not None:
            return self.soft_tokens
        return 0 if self.variant is PrototypeVariant.NAME_ONLY else DEFAULT_SOFT_TOKENS

    @property
    def shot_label(self) -> str:
        return str(self.shots)

    def encoder_config(self, vocab_size: int) -> EncoderConfig:
        return EncoderConfig(
            vocab_size=vocab_size,
            embed_dim=self.embed_dim,
            n_layers=self.n_layers,
            n_heads=self.n_heads,
            mlp_ratio=self.mlp_ratio,
            lora_rank=self.lora_rank,
            lora_alpha=self.lora_alpha,
            max_seq_len=self.max_seq_len,
            rep_layer=self.rep_layer,
            backbone_seed=self.backbone_seed,
        )

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(
            method=self.method,
            lr=self.lr,
            epochs=self.epochs,
            batch_size=self.batch_size,
            lambda_=self.lambda_,
            tau=self.tau,
            seed=seed,
            weight_decay=self.weight_decay,
        )

    def run_id(self, seed: int) -> str:
        """Directory name of one (cell, seed) run; the head baseline has no variant or λ."""
        if self.method is TuningMethodName.DISCRIMINATIVE:
            return f"{self.method.value}-shot{self.shots}-seed{seed}"
        return (
            f"{self.method.value}-{self.variant.value}-lambda{format_lambda(self.lambda_)}"
            f"-shot{self.shots}-seed{seed}"
        )

    def config_hash(self) -> str:
        payload = json.dumps(
            self.model_dump(mode="json", by_alias=True, exclude={"out"}), sort_keys=True
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


class GridAxes(BaseModel):
    """List-valued axes of an experiment grid; unset axes keep the base value."""

    methods: list[TuningMethodName] | None = None
    shots_list: list[Shots] | None = None
    lambdas: list[float] | None = None
    variants: list[PrototypeVariant] | None = None

    def varying(self) -> list[str]:
        """Axes with more than one value, which label the cells."""
        return [
            name
            for name in ("lambdas", "variants")
            if getattr(self, name) is not None and len(getattr(self, name)) > 1
        ]

    def expand(self, base: RunSpec) -> list[tuple[str, RunSpec]]:
        """
        Cartesian product of the axes as (method label, cell spec) pairs.

        The discriminative baseline ignores λ and the prototype variant, so it
        gets one cell per shot count, built from the base values.
        """
        methods = self.methods or [base.method]
        shots = self.shots_list or [base.shots]
        lambdas = self.lambdas if self.lambdas is not None else [base.lambda_]
        variants = self.variants or [base.variant]
        varying = self.varying()
        cells = []
        seen = set()
        for method, shot, lam, variant in itertools.product(methods, shots, lambdas, variants):
            if method is TuningMethodName.DISCRIMINATIVE:
                if (method, shot) in seen:
                    continue
                seen.add((method, shot))
                spec = RunSpec.model_validate(
                    {**base.model_dump(), "method": method, "shots": shot}
                )
                cells.append((method.value, spec))
                continue
            update = {"method": method, "shots": shot, "lambda_": lam, "variant": variant}
            if variant is PrototypeVariant.NAME_ONLY:
                update["soft_tokens"] = 0
            elif base.soft_tokens == 0:
                update["soft_tokens"] = None
            spec = RunSpec.model_validate({**base.model_dump(), **update})
            tags = []
            if "lambdas" in varying:
                tags.append(f"lambda={format_lambda(lam)}")
            if "variants" in varying:
                tags.append(f"variant={variant.value}")
            label = method.value + (f"[{','.join(tags)}]" if tags else "")
            cells.append((label, spec))
        return cells


class ReportRow(BaseModel):
    """One CSV row; seed is 'mean' for the per-cell aggregate."""

    shot: str
    method: str
    seed: str
    id_acc: float
    auroc: float
    far95: float
    aupr: float


class CellFailure(BaseModel):
    method: str
    shot: str
    seed: int
    run_id: str
    error: str


class ExperimentReport(BaseModel):
    """Seed rows, per-cell means, failed cells and provenance."""

    rows: list[ReportRow]
    means: list[ReportRow]
    failures: list[CellFailure] = Field(default_factory=list)
    provenance: dict[str, str] = Field(default_factory=dict)
