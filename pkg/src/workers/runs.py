"""Run execution: one (cell, seed) train+eval run, checkpoint evaluation and seed grids."""
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from tqdm import tqdm

from src import __version__
from src.config import settings
from src.data.corpus import LabeledCorpus, load_corpus
from src.data.sampling import few_shot_sample
from src.evaluation.metrics import compute_report, pr_curve_points, roc_curve_points
from src.evaluation.plots import plot_pr, plot_roc, plot_score_histogram, plot_val_acc
from src.evaluation.report import (
    mean_rows,
    report_row,
    write_metric_report,
    write_report,
    write_scores,
)
from src.evaluation.scoring import build_bank, score_batch
from src.exceptions import CompatibilityError, FileError
from src.methods import TuningMethod, get_method
from src.models.checkpoint import load_checkpoint, save_checkpoint
from src.models.encoder import EncoderModel
from src.schemas.data import DatasetManifest
from src.schemas.enums import PrototypeVariant, Split, TuningMethodName
from src.schemas.experiment import CellFailure, ExperimentReport, GridAxes, ReportRow, RunSpec
from src.schemas.metrics import MetricReport, ScoredSample
from src.schemas.training import EpochRecord, LossWeights
from src.training.trainer import TrainResult, train

logger = logging.getLogger(__name__)

BANK_FILE = "bank.safetensors"
SCORES_FILE = "scores.jsonl"
TRAIN_LOG_FILE = "train_log.jsonl"
CONFIG_FILE = "config.json"


@dataclass
class RunOutcome:
    """Artifacts and results of one evaluated run."""

    run_id: str
    seed: int
    run_dir: Path
    report: MetricReport
    samples: list[ScoredSample]
    log: list[EpochRecord] = field(default_factory=list)
    checkpoint: Path | None = None


@dataclass
class TrainedRun:
    """A trained method, the few-shot corpus it was trained on and its artifacts."""

    run_id: str
    seed: int
    run_dir: Path
    method: TuningMethod
    corpus: LabeledCorpus
    result: TrainResult
    checkpoint: Path


def resolve_seeds(spec: RunSpec) -> RunSpec:
    """Apply PROTO_OOD_SEED_OVERRIDE, which replaces the whole seed list."""
    if settings.seed_override is None:
        return spec
    logger.info(f"Seed list {spec.seeds} overridden by {settings.seed_override}")
    return spec.model_copy(update={"seeds": [settings.seed_override]})


def prepare_corpus(
    manifest_path: str | Path, max_seq_len: int, shots, seed: int
) -> tuple[LabeledCorpus, LabeledCorpus]:
    """Full corpus and its few-shot subset for one seed."""
    manifest = DatasetManifest.from_file(manifest_path)
    corpus = load_corpus(manifest, max_seq_len=max_seq_len)
    return corpus, few_shot_sample(corpus, shots, seed)


def build_method(spec: RunSpec, corpus: LabeledCorpus, seed: int) -> TuningMethod:
    """Fresh encoder (adapters seeded by `seed`) wrapped in the RunSpec's tuning method."""
    model = EncoderModel(spec.encoder_config(len(corpus.vocab)), adapter_seed=seed)
    return get_method(
        spec.method,
        model,
        corpus.classes,
        LossWeights(lambda_=spec.lambda_, tau=spec.tau),
        vocab=corpus.vocab,
        scenario=corpus.manifest.scenario,
        variant=spec.variant,
        num_soft_tokens=spec.num_soft_tokens,
        shared_soft_tokens=spec.shared_soft_tokens,
        seed=seed,
    )


def _write_json(path: Path, payload: Any) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise FileError(f"Cannot write {path}: {e}") from e


def _write_log(path: Path, log: list[EpochRecord]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("".join(record.model_dump_json() + "\n" for record in log))
    except OSError as e:
        raise FileError(f"Cannot write {path}: {e}") from e


def evaluate_method(
    method: TuningMethod,
    corpus: LabeledCorpus,
    run_dir: str | Path,
    include_prototypes: bool = False,
) -> tuple[MetricReport, list[ScoredSample]]:
    """
    Score every test sample against the validation bank and classify the ID ones.

    Writes bank.safetensors, scores.jsonl, metrics.json and metrics.csv into
    `run_dir`.
    """
    run_dir = Path(run_dir)
    model = method.model
    prototypes = None
    if include_prototypes and method.name is TuningMethodName.SEMANTIC_MATCHING:
        prototypes = method.prototype_matrix().data
    bank = build_bank(model, corpus.split(Split.VAL), prototypes, corpus.classes)
    test = corpus.split(Split.TEST)
    bank.check_disjoint(s.sample_id for s in test)

    reps = model.encode_batch([s.token_ids for s in test])
    scores = score_batch(reps, bank)
    predicted = method.predict(reps)
    samples = [
        ScoredSample(
            score=float(score),
            is_id=s.is_id,
            predicted_class=int(pred) if s.is_id else None,
            true_class=corpus.class_index[s.label] if s.is_id else None,
            sample_id=s.sample_id,
        )
        for s, score, pred in zip(test, scores, predicted)
    ]
    report = compute_report(samples)

    bank.save(run_dir / BANK_FILE)
    write_scores(samples, run_dir / SCORES_FILE)
    logger.info(
        f"Evaluated {len(test)} test samples: acc {report.id_acc:.4f} auroc {report.auroc:.4f} "
        f"far95 {report.far_at_95:.4f} aupr {report.aupr:.4f}"
    )
    return report, samples


def train_run(spec: RunSpec, seed: int) -> TrainedRun:
    """
    Sample, train and checkpoint one (cell, seed) run.

    The run directory <out>/<run_id> receives config.json, train_log.jsonl and
    <run_id>.best.ckpt.
    """
    run_id = spec.run_id(seed)
    run_dir = Path(spec.out) / run_id
    logger.info(f"Starting run {run_id}")

    _, sampled = prepare_corpus(spec.manifest, spec.max_seq_len, spec.shots, seed)
    method = build_method(spec, sampled, seed)
    train_config = spec.train_config(seed)
    _write_json(
        run_dir / CONFIG_FILE,
        {
            "run_id": run_id,
            "seed": seed,
            "config_hash": spec.config_hash(),
            "spec": spec.model_dump(mode="json", by_alias=True),
            "train": train_config.model_dump(mode="json", by_alias=True),
            "encoder": method.model.config.model_dump(mode="json"),
        },
    )

    result = train(sampled, method, train_config)
    _write_log(run_dir / TRAIN_LOG_FILE, result.log)
    checkpoint = save_checkpoint(
        run_dir / f"{run_id}.best.ckpt",
        method.checkpoint_tensors(),
        method.model.config,
        {
            **method.checkpoint_info(),
            "run_id": run_id,
            "seed": seed,
            "shots": spec.shots,
            "manifest": spec.manifest,
            "lambda": spec.lambda_,
            "tau": spec.tau,
            "bank_include_prototypes": spec.bank_include_prototypes,
            "best_epoch": result.best_epoch,
            "best_val_loss": result.best_val_loss,
            "config_hash": spec.config_hash(),
        },
    )

    return TrainedRun(run_id, seed, run_dir, method, sampled, result, checkpoint)


def run_single(spec: RunSpec, seed: int) -> RunOutcome:
    """Train one (cell, seed) run, then evaluate it into the same run directory."""
    trained = train_run(spec, seed)
    report, samples = evaluate_method(
        trained.method, trained.corpus, trained.run_dir, spec.bank_include_prototypes
    )
    row = report_row(spec.shot_label, spec.method.value, seed, report)
    write_metric_report(report, row, trained.run_dir)
    return RunOutcome(
        trained.run_id,
        seed,
        trained.run_dir,
        report,
        samples,
        trained.result.log,
        trained.checkpoint,
    )


def evaluate_checkpoint(
    checkpoint_path: str | Path,
    manifest_path: str | Path | None = None,
    out_dir: str | Path | None = None,
) -> RunOutcome:
    """
    Rebuild a trained method from its checkpoint and evaluate it.

    The corpus and the few-shot validation split are regenerated from the
    manifest with the checkpoint's shots and seed, so the bank matches the one
    used at training time.

    Raises:
        CompatibilityError: If the manifest's classes or vocabulary differ from the checkpoint's
    """
    checkpoint_path = Path(checkpoint_path)
    ckpt = load_checkpoint(checkpoint_path)
    info = ckpt.info
    seed = int(info.get("seed", 0))
    manifest_path = manifest_path or info.get("manifest")
    if manifest_path is None:
        raise CompatibilityError(f"{checkpoint_path} records no manifest; pass one explicitly")

    _, sampled = prepare_corpus(manifest_path, ckpt.encoder.max_seq_len, info["shots"], seed)
    if sampled.classes != info.get("classes"):
        raise CompatibilityError("Manifest ID classes differ from the checkpoint's classes")
    if len(sampled.vocab) != ckpt.encoder.vocab_size:
        raise CompatibilityError(
            f"Manifest vocabulary has {len(sampled.vocab)} tokens, "
            f"checkpoint encoder expects {ckpt.encoder.vocab_size}"
        )

    model = EncoderModel(ckpt.encoder, adapter_seed=seed)
    variant = PrototypeVariant(info.get("variant", PrototypeVariant.SCENARIO.value))
    method = get_method(
        info["method"],
        model,
        sampled.classes,
        LossWeights(lambda_=info.get("lambda", 0.2), tau=info.get("tau", 0.01)),
        vocab=sampled.vocab,
        scenario=sampled.manifest.scenario,
        variant=variant,
        num_soft_tokens=int(info.get("soft_tokens", 0)),
        shared_soft_tokens=bool(info.get("shared_soft_tokens", False)),
        seed=seed,
    )
    model.load_state_dict(ckpt.tensors)
    method.load_state_dict(ckpt.tensors)

    run_dir = Path(out_dir) if out_dir is not None else checkpoint_path.parent
    report, samples = evaluate_method(
        method, sampled, run_dir, bool(info.get("bank_include_prototypes", False))
    )
    row = report_row(str(info["shots"]), info["method"], seed, report)
    write_metric_report(report, row, run_dir)
    return RunOutcome(info.get("run_id", checkpoint_path.stem), seed, run_dir, report, samples)


# ─── Grid ───────────────────────────────────────────────────────────────────


def _file_label(shot: str, label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.=-]+", "_", f"{shot}shot-{label}").strip("_")


def _emit_plots(
    cells: list[tuple[str, RunSpec]],
    outcomes: dict[tuple[int, int], RunOutcome],
    out_dir: Path,
) -> None:
    """ROC/PR and histograms from each cell's first completed seed; val accuracy over seeds."""
    roc, pr, val_acc = {}, {}, {}
    for index, (label, spec) in enumerate(cells):
        done = [outcomes[(index, seed)] for seed in spec.seeds if (index, seed) in outcomes]
        if not done:
            continue
        name = f"{label} ({spec.shot_label}-shot)"
        first = done[0]
        roc[name] = roc_curve_points(first.samples)
        pr[name] = pr_curve_points(first.samples)
        plot_score_histogram(
            [s.score for s in first.samples if s.is_id],
            [s.score for s in first.samples if not s.is_id],
            out_dir / f"hist_{_file_label(spec.shot_label, label)}.svg",
            title=f"{name}, seed {first.seed}",
        )
        val_acc[name] = np.mean([[r.val_acc for r in o.log] for o in done], axis=0).tolist()
    if roc:
        plot_roc(roc, out_dir / "roc.svg")
        plot_pr(pr, out_dir / "pr.svg")
        plot_val_acc(val_acc, out_dir / "val_acc.svg")


def run_grid(
    base: RunSpec,
    axes: GridAxes | None = None,
    parallel: int | None = None,
    progress: bool = True,
) -> ExperimentReport:
    """
    Train and evaluate every (cell, seed) pair, then aggregate and plot.

    Cells are the Cartesian product of the grid axes. A run that raises anything
    is recorded in the report's failures and logged as a warning; means cover
    completed runs.
    Rows keep cell-then-seed order whatever the completion order.

    Raises:
        Exception: If no run completes (the first failure is re-raised)
    """
    base = resolve_seeds(base)
    cells = (axes or GridAxes()).expand(base)
    tasks = [(index, seed) for index in range(len(cells)) for seed in base.seeds]
    workers = max(1, parallel or settings.parallel)
    logger.info(f"Grid: {len(cells)} cells x {len(base.seeds)} seeds, {workers} workers")

    outcomes: dict[tuple[int, int], RunOutcome] = {}
    errors: dict[tuple[int, int], Exception] = {}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(run_single, cells[i][1], seed): (i, seed) for i, seed in tasks}
        for future in tqdm(as_completed(futures), total=len(futures), disable=not progress):
            key = futures[future]
            try:
                outcomes[key] = future.result()
            except Exception as e:
                _, spec = cells[key[0]]
                logger.warning(f"Run {spec.run_id(key[1])} failed: {type(e).__name__}: {e}")
                errors[key] = e

    if not outcomes:
        raise errors[tasks[0]]

    rows: list[ReportRow] = []
    failures: list[CellFailure] = []
    for key in tasks:
        label, spec = cells[key[0]]
        if key in outcomes:
            rows.append(report_row(spec.shot_label, label, key[1], outcomes[key].report))
        else:
            error = errors[key]
            failures.append(
                CellFailure(
                    method=label,
                    shot=spec.shot_label,
                    seed=key[1],
                    run_id=spec.run_id(key[1]),
                    error=f"{type(error).__name__}: {error}",
                )
            )
    if failures:
        logger.warning(f"{len(failures)} of {len(tasks)} runs failed; means cover completed runs")

    report = ExperimentReport(
        rows=rows,
        means=mean_rows(rows),
        failures=failures,
        provenance={"config_hash": base.config_hash(), "code_version": __version__},
    )
    out_dir = Path(base.out)
    write_report(report, out_dir)
    _emit_plots(cells, outcomes, out_dir)
    return report
