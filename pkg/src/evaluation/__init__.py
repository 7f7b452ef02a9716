"""OOD scoring, exact metrics, reports and plots."""
from src.evaluation.metrics import (
    aupr,
    auroc,
    compute_report,
    far_at_tpr,
    id_accuracy,
    pr_curve_points,
    roc_curve_points,
)
from src.evaluation.scoring import (
    IntentRecognizer,
    RepresentationBank,
    build_bank,
    classify,
    classify_batch,
    cosine_score,
    score_batch,
)

__all__ = [
    "aupr",
    "auroc",
    "compute_report",
    "far_at_tpr",
    "id_accuracy",
    "pr_curve_points",
    "roc_curve_points",
    "IntentRecognizer",
    "RepresentationBank",
    "build_bank",
    "classify",
    "classify_batch",
    "cosine_score",
    "score_batch",
]
