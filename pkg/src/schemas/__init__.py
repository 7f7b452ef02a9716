"""Pydantic schemas for configuration, corpora, logs and reports."""
from src.schemas.data import DatasetManifest, Sample
from src.schemas.encoder import EncoderConfig
from src.schemas.enums import PrototypeVariant, RepLayer, Split, TuningMethodName
from src.schemas.experiment import (
    CellFailure,
    ExperimentReport,
    GridAxes,
    ReportRow,
    RunSpec,
)
from src.schemas.metrics import MetricReport, ScoredSample
from src.schemas.training import EpochRecord, LossWeights, TrainConfig

__all__ = [
    "DatasetManifest",
    "Sample",
    "EncoderConfig",
    "PrototypeVariant",
    "RepLayer",
    "Split",
    "TuningMethodName",
    "RunSpec",
    "GridAxes",
    "ReportRow",
    "CellFailure",
    "ExperimentReport",
    "MetricReport",
    "ScoredSample",
    "EpochRecord",
    "LossWeights",
    "TrainConfig",
]
