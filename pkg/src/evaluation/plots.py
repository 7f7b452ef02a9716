"""SVG figures for experiment reports: ROC, PR, score histograms, validation accuracy."""
import logging
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
from matplotlib.figure import Figure  # noqa: E402

logger = logging.getLogger(__name__)

HIST_BINS = 50
SVG_SALT = "protomatch"

# Fixed element ids and no timestamp keep reruns byte-identical
matplotlib.rcParams.update({"svg.hashsalt": SVG_SALT, "font.family": "DejaVu Sans"})


def _save(fig: Figure, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    logger.info(f"Wrote {path}")
    return path


def _curve_figure(
    curves: dict[str, Sequence[tuple[float, float]]],
    xlabel: str,
    ylabel: str,
    title: str,
    diagonal: bool = False,
) -> Figure:
    fig = Figure(figsize=(5, 5), constrained_layout=True)
    ax = fig.subplots()
    for label, points in curves.items():
        xs, ys = zip(*points)
        ax.step(xs, ys, where="post", label=label)
    if diagonal:
        ax.plot([0, 1], [0, 1], linestyle=":", color="grey")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.02)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=7)
    return fig


def plot_roc(curves: dict[str, Sequence[tuple[float, float]]], path: str | Path) -> Path:
    """ROC step curves, one per cell, from exact threshold sweeps."""
    fig = _curve_figure(curves, "False alarm rate (OOD accepted)", "ID recall", "ROC", True)
    return _save(fig, path)


def plot_pr(curves: dict[str, Sequence[tuple[float, float]]], path: str | Path) -> Path:
    """Precision-recall step curves with ID as the positive class."""
    fig = _curve_figure(curves, "ID recall", "Precision", "Precision-recall")
    return _save(fig, path)


def plot_score_histogram(
    id_scores: Sequence[float], ood_scores: Sequence[float], path: str | Path, title: str = ""
) -> Path:
    """ID vs OOD cosine-score histograms over 50 fixed bins on [-1, 1]."""
    fig = Figure(figsize=(6, 4), constrained_layout=True)
    ax = fig.subplots()
    bins = [-1.0 + 2.0 * i / HIST_BINS for i in range(HIST_BINS + 1)]
    ax.hist(list(id_scores), bins=bins, alpha=0.6, label="ID")
    ax.hist(list(ood_scores), bins=bins, alpha=0.6, label="OOD")
    ax.set_xlabel("Cosine score")
    ax.set_ylabel("Samples")
    ax.set_title(title or "Score distribution")
    ax.legend(loc="upper left")
    return _save(fig, path)


def plot_val_acc(curves: dict[str, Sequence[float]], path: str | Path) -> Path:
    """Validation accuracy per epoch, one line per cell."""
    fig = Figure(figsize=(6, 4), constrained_layout=True)
    ax = fig.subplots()
    for label, accs in curves.items():
        ax.plot(range(1, len(accs) + 1), list(accs), marker="o", markersize=3, label=label)
    ax.set_xlabel("Epoch")
    ax.set_ylabel("Validation accuracy")
    ax.set_ylim(0.0, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=7)
    return _save(fig, path)
