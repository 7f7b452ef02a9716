"""Exact ID accuracy and OOD detection metrics, ID as the positive class."""
import math
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from src.exceptions import ConfigError, MetricUndefinedError
from src.schemas.metrics import MetricReport, ScoredSample

DEFAULT_TPR = 0.95


def _split(samples: Sequence[ScoredSample]) -> tuple[np.ndarray, np.ndarray]:
    id_scores = np.array([s.score for s in samples if s.is_id], dtype=np.float64)
    ood_scores = np.array([s.score for s in samples if not s.is_id], dtype=np.float64)
    return id_scores, ood_scores


def _require_both(id_scores: np.ndarray, ood_scores: np.ndarray, metric: str) -> None:
    if id_scores.size == 0 or ood_scores.size == 0:
        raise MetricUndefinedError(
            f"{metric} needs ID and OOD samples, got {id_scores.size} ID and {ood_scores.size} OOD"
        )


def auroc(samples: Sequence[ScoredSample]) -> float:
    """
    P(random ID score > random OOD score), ties counted 1/2.

    Computed from average ranks (Mann-Whitney U), no curve integration.

    Raises:
        MetricUndefinedError: If either class is absent
    """
    id_scores, ood_scores = _split(samples)
    _require_both(id_scores, ood_scores, "AUROC")
    n_id, n_ood = id_scores.size, ood_scores.size
    ranks = rankdata(np.concatenate([id_scores, ood_scores]), method="average")
    u_stat = math.fsum(ranks[:n_id].tolist()) - n_id * (n_id + 1) / 2.0
    return u_stat / (n_id * n_ood)


def far_at_tpr(
    samples: Sequence[ScoredSample], tpr_target: float = DEFAULT_TPR
) -> tuple[float, float]:
    """
    (far, threshold) at the smallest threshold boundary recalling ≥ tpr_target of ID.

    The threshold is the largest score t with |ID ≥ t| / n_id ≥ tpr_target, i.e. the
    k-th largest ID score for the smallest k with k/n_id ≥ tpr_target. far is the
    fraction of OOD samples with score ≥ t.

    Raises:
        ConfigError: If tpr_target is outside (0, 1]
        MetricUndefinedError: If either class is absent
    """
    if not 0.0 < tpr_target <= 1.0:
        raise ConfigError(f"tpr_target must lie in (0, 1], got {tpr_target}")
    id_scores, ood_scores = _split(samples)
    _require_both(id_scores, ood_scores, "FAR@TPR")
    n_id = id_scores.size
    k = next(k for k in range(1, n_id + 1) if k / n_id >= tpr_target)
    threshold = float(np.sort(id_scores)[::-1][k - 1])
    far = int(np.count_nonzero(ood_scores >= threshold)) / ood_scores.size
    return far, threshold


def _threshold_sweep(
    samples: Sequence[ScoredSample],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct thresholds (high to low) with cumulative TP and FP counts at each."""
    scores = np.array([s.score for s in samples], dtype=np.float64)
    positive = np.array([s.is_id for s in samples], dtype=bool)
    thresholds = np.unique(scores)[::-1]
    tp = np.array([np.count_nonzero(positive & (scores >= t)) for t in thresholds])
    fp = np.array([np.count_nonzero(~positive & (scores >= t)) for t in thresholds])
    return thresholds, tp, fp


def aupr(samples: Sequence[ScoredSample]) -> float:
    """
    Average precision with ID positive: each newly recalled positive contributes the
    precision of the tie block it is recalled in.

    Raises:
        MetricUndefinedError: If there are no ID samples
    """
    n_pos = sum(1 for s in samples if s.is_id)
    if n_pos == 0:
        raise MetricUndefinedError("AUPR needs at least one ID sample")
    _, tp, fp = _threshold_sweep(samples)
    new_tp = np.diff(np.concatenate([[0], tp]))
    terms = []
    for n, t, f in zip(new_tp, tp, fp):
        terms.extend([int(t) / (int(t) + int(f))] * int(n))
    return math.fsum(terms) / n_pos


def id_accuracy(samples: Sequence[ScoredSample]) -> float:
    """
    Fraction of ID samples whose predicted class is the true class; OOD rows ignored.

    Raises:
        MetricUndefinedError: If there are no ID samples
    """
    id_rows = [s for s in samples if s.is_id]
    if not id_rows:
        raise MetricUndefinedError("ID accuracy needs at least one ID sample")
    return sum(1 for s in id_rows if s.predicted_class == s.true_class) / len(id_rows)


def roc_curve_points(samples: Sequence[ScoredSample]) -> list[tuple[float, float]]:
    """(FPR, TPR) step points from (0, 0) to (1, 1), one per distinct threshold."""
    id_scores, ood_scores = _split(samples)
    _require_both(id_scores, ood_scores, "ROC curve")
    _, tp, fp = _threshold_sweep(samples)
    points = [(0.0, 0.0)]
    points.extend((float(f / ood_scores.size), float(t / id_scores.size)) for t, f in zip(tp, fp))
    return points


def pr_curve_points(samples: Sequence[ScoredSample]) -> list[tuple[float, float]]:
    """(recall, precision) step points starting at (0, 1), one per distinct threshold."""
    n_pos = sum(1 for s in samples if s.is_id)
    if n_pos == 0:
        raise MetricUndefinedError("PR curve needs at least one ID sample")
    _, tp, fp = _threshold_sweep(samples)
    points = [(0.0, 1.0)]
    points.extend((float(t / n_pos), float(t / (t + f))) for t, f in zip(tp, fp))
    return points


def compute_report(
    samples: Sequence[ScoredSample], tpr_target: float = DEFAULT_TPR
) -> MetricReport:
    """All four metrics plus counts and the FAR threshold."""
    far, threshold = far_at_tpr(samples, tpr_target)
    id_scores, ood_scores = _split(samples)
    return MetricReport(
        id_acc=id_accuracy(samples),
        auroc=auroc(samples),
        far_at_95=far,
        aupr=aupr(samples),
        n_id=id_scores.size,
        n_ood=ood_scores.size,
        threshold_at_95=threshold,
    )
