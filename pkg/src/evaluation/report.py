"""Report tables (CSV/JSON) and per-sample score dumps."""
import json
import logging
from pathlib import Path
from typing import Sequence

import pandas as pd

from src.exceptions import FileError, ParseError
from src.schemas.experiment import ExperimentReport, ReportRow
from src.schemas.metrics import MetricReport, ScoredSample

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["shot", "method", "seed", "id_acc", "auroc", "far95", "aupr"]
METRIC_COLUMNS = CSV_COLUMNS[3:]
MEAN_SEED = "mean"


def report_row(shot: str, method: str, seed: int | str, report: MetricReport) -> ReportRow:
    return ReportRow(
        shot=str(shot),
        method=method,
        seed=str(seed),
        id_acc=report.id_acc,
        auroc=report.auroc,
        far95=report.far_at_95,
        aupr=report.aupr,
    )


def mean_rows(rows: Sequence[ReportRow]) -> list[ReportRow]:
    """Arithmetic mean over seeds per (shot, method) cell, in first-seen cell order."""
    if not rows:
        return []
    frame = pd.DataFrame([row.model_dump() for row in rows], columns=CSV_COLUMNS)
    means = frame.groupby(["shot", "method"], sort=False)[METRIC_COLUMNS].mean().reset_index()
    return [
        ReportRow(seed=MEAN_SEED, **{k: record[k] for k in ["shot", "method", *METRIC_COLUMNS]})
        for record in means.to_dict(orient="records")
    ]


def report_frame(report: ExperimentReport) -> pd.DataFrame:
    """Seed rows of each cell followed by that cell's mean row."""
    ordered = []
    for mean in report.means:
        ordered.extend(
            row for row in report.rows if (row.shot, row.method) == (mean.shot, mean.method)
        )
        ordered.append(mean)
    return pd.DataFrame([row.model_dump() for row in ordered], columns=CSV_COLUMNS)


def write_report(report: ExperimentReport, out_dir: str | Path) -> tuple[Path, Path]:
    """
    Write report.csv and report.json.

    Raises:
        FileError: If the files cannot be written
    """
    out_dir = Path(out_dir)
    csv_path, json_path = out_dir / "report.csv", out_dir / "report.json"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        report_frame(report).to_csv(csv_path, index=False, lineterminator="\n")
        json_path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise FileError(f"Cannot write report to {out_dir}: {e}") from e
    logger.info(f"Wrote {csv_path} ({len(report.rows)} rows, {len(report.means)} means)")
    return csv_path, json_path


def write_metric_report(
    report: MetricReport, row: ReportRow, out_dir: str | Path
) -> tuple[Path, Path]:
    """metrics.json (the full MetricReport) and metrics.csv (one table row)."""
    out_dir = Path(out_dir)
    json_path, csv_path = out_dir / "metrics.json", out_dir / "metrics.csv"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        json_path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        pd.DataFrame([row.model_dump()], columns=CSV_COLUMNS).to_csv(
            csv_path, index=False, lineterminator="\n"
        )
    except OSError as e:
        raise FileError(f"Cannot write metrics to {out_dir}: {e}") from e
    return json_path, csv_path


def write_scores(samples: Sequence[ScoredSample], path: str | Path) -> Path:
    """scores.jsonl: sample id, is_id, score, predicted and true class per test sample."""
    path = Path(path)
    lines = [
        json.dumps(
            {
                "sample_id": s.sample_id,
                "is_id": s.is_id,
                "score": s.score,
                "predicted": s.predicted_class,
                "true": s.true_class,
            }
        )
        for s in samples
    ]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("".join(line + "\n" for line in lines))
    except OSError as e:
        raise FileError(f"Cannot write scores to {path}: {e}") from e
    return path


def read_scores(path: str | Path) -> list[ScoredSample]:
    """
    Raises:
        FileError: If the file cannot be read
        ParseError: If a line is not a score record
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise FileError(f"Cannot read scores {path}: {e}") from e
    samples = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            samples.append(
                ScoredSample(
                    score=raw["score"],
                    is_id=raw["is_id"],
                    predicted_class=raw["predicted"],
                    true_class=raw["true"],
                    sample_id=raw["sample_id"],
                )
            )
        except (json.JSONDecodeError, KeyError, ValueError) as e:
            raise ParseError(f"{path}:{line_no}: malformed score record ({e})") from e
    return samples
