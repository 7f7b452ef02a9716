"""Pydantic schemas for training configuration and logs."""
from pydantic import BaseModel, ConfigDict, Field

from src.schemas.enums import TuningMethodName


class LossWeights(BaseModel):
    """Diversity weight λ and matching temperature τ."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lambda_: float = Field(default=0.2, ge=0.0, alias="lambda")
    tau: float = Field(default=0.01, gt=0.0)


class TrainConfig(BaseModel):
    """Optimization protocol: AdamW with linear decay, best-validation selection."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    method: TuningMethodName = TuningMethodName.SEMANTIC_MATCHING
    lr: float = Field(default=1e-4, ge=0.0)
    epochs: int = Field(default=25, ge=1)
    batch_size: int = Field(default=16, ge=1)
    lambda_: float = Field(default=0.2, ge=0.0, alias="lambda")
    tau: float = Field(default=0.01, gt=0.0)
    seed: int = 1
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    weight_decay: float = Field(default=0.01, ge=0.0)

    @property
    def loss_weights(self) -> LossWeights:
        return LossWeights(lambda_=self.lambda_, tau=self.tau)


class EpochRecord(BaseModel):
    """One line of train_log.jsonl."""

    epoch: int
    train_loss: float
    val_loss: float
    val_match: float
    val_diversity: float
    val_acc: float
    lr: float
    best: bool = False
