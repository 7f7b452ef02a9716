"""Pydantic schemas for scored samples and metric reports."""
from pydantic import BaseModel, ConfigDict, Field, model_validator


class ScoredSample(BaseModel):
    """Cosine confidence and (for ID rows) predicted/true class of one test sample."""

    model_config = ConfigDict(frozen=True)

    score: float
    is_id: bool
    predicted_class: int | None = None
    true_class: int | None = None
    sample_id: str | None = None

    @model_validator(mode="after")
    def _check_classes(self) -> "ScoredSample":
        has_classes = self.predicted_class is not None and self.true_class is not None
        no_classes = self.predicted_class is None and self.true_class is None
        if self.is_id and not has_classes:
            raise ValueError("ID samples need predicted_class and true_class")
        if not self.is_id and not no_classes:
            raise ValueError("OOD samples carry no class indices")
        return self


class MetricReport(BaseModel):
    """ID accuracy and OOD detection metrics, ID as the positive class."""

    id_acc: float = Field(ge=0.0, le=1.0)
    auroc: float = Field(ge=0.0, le=1.0)
    far_at_95: float = Field(ge=0.0, le=1.0)
    aupr: float = Field(ge=0.0, le=1.0)
    n_id: int = Field(ge=1)
    n_ood: int = Field(ge=1)
    threshold_at_95: float
