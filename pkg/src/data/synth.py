"""Synthetic intent corpora with controllable class-pool overlap."""
import json
import logging
from pathlib import Path

import numpy as np

from src.data.corpus import LabeledCorpus, build_corpus
from src.exceptions import ConfigError, FileError
from src.schemas.data import DatasetManifest
from src.schemas.enums import Split

logger = logging.getLogger(__name__)

MIN_LEN = 4
MAX_LEN = 12
SYNTH_SCENARIO = "synthetic"
SPLIT_FILES = {Split.TRAIN: "train.jsonl", Split.VAL: "val.jsonl", Split.TEST: "test.jsonl"}
VOCAB_FILE = "vocab.txt"


def _word(index: int) -> str:
    return f"tok{index:04d}"


def synth_corpus(
    k_id: int,
    k_ood: int,
    per_class: int,
    vocab_size: int,
    overlap: float,
    seed: int,
    val_per_class: int | None = None,
    test_per_class: int | None = None,
    scenario: str = SYNTH_SCENARIO,
) -> tuple[DatasetManifest, LabeledCorpus]:
    """
    Generate a corpus whose classes own disjoint token pools.

    The word list is split into K_id + K_ood class pools of equal size and one
    shared pool holding the remainder. Each utterance has 4 to 12 tokens; every
    token comes from the shared pool with probability `overlap`, otherwise from
    the class pool. A class is named by the first two tokens of its pool.

    The whole word list, OOD pools included, becomes the vocabulary and is
    written as `vocab.txt`; it carries no labels.

    Raises:
        ConfigError: If sizes are non-positive, overlap is outside [0, 1], or the
            vocabulary cannot give every class a pool of at least two tokens
    """
    if k_id < 1 or k_ood < 1 or per_class < 1:
        raise ConfigError("k_id, k_ood and per_class must all be >= 1")
    if not 0.0 <= overlap <= 1.0:
        raise ConfigError(f"overlap must lie in [0, 1], got {overlap}")
    n_classes = k_id + k_ood
    pool_size = vocab_size // (n_classes + 1)
    if pool_size < 2:
        raise ConfigError(
            f"vocab_size {vocab_size} is too small for {n_classes} class pools plus a shared "
            f"pool of at least two tokens each; need vocab_size >= {2 * (n_classes + 1)}"
        )
    val_per_class = max(1, per_class // 2) if val_per_class is None else val_per_class
    test_per_class = max(1, per_class // 2) if test_per_class is None else test_per_class

    pools = [
        [_word(c * pool_size + j) for j in range(pool_size)] for c in range(n_classes)
    ]
    shared = [_word(i) for i in range(n_classes * pool_size, vocab_size)]
    names = [" ".join(pool[:2]) for pool in pools]
    words = [_word(i) for i in range(vocab_size)]
    rng = np.random.default_rng(seed)

    def utterance(pool: list[str]) -> str:
        length = int(rng.integers(MIN_LEN, MAX_LEN + 1))
        from_shared = rng.random(length) < overlap
        words = [
            shared[int(rng.integers(len(shared)))] if s else pool[int(rng.integers(len(pool)))]
            for s in from_shared
        ]
        return " ".join(words)

    rows: dict[Split, list[dict]] = {split: [] for split in Split}
    plan = [(Split.TRAIN, per_class, k_id), (Split.VAL, val_per_class, k_id),
            (Split.TEST, test_per_class, n_classes)]
    for split, count, n_cls in plan:
        for c in range(n_cls):
            rows[split].extend(
                {"text": utterance(pools[c]), "label": names[c]} for _ in range(count)
            )

    manifest = DatasetManifest(
        scenario=scenario,
        id_classes=names[:k_id],
        ood_classes=names[k_id:],
        train_path=SPLIT_FILES[Split.TRAIN],
        val_path=SPLIT_FILES[Split.VAL],
        test_path=SPLIT_FILES[Split.TEST],
        vocab_path=VOCAB_FILE,
    )
    logger.info(
        f"Synthesized {k_id}+{k_ood} classes, pool size {pool_size}, shared {len(shared)}, "
        f"overlap {overlap}"
    )
    return manifest, build_corpus(manifest, rows, base_tokens=words)


def write_corpus(manifest: DatasetManifest, corpus: LabeledCorpus, out_dir: str | Path) -> Path:
    """
    Write manifest.json, the three JSONL split files and, when the manifest names
    one, the word list; returns the manifest path.

    Raises:
        FileError: If the directory or files cannot be written
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for split, filename in SPLIT_FILES.items():
            lines = [
                json.dumps({"text": s.text, "label": s.label}, ensure_ascii=False)
                for s in corpus.split(split)
            ]
            with open(out_dir / filename, "w", encoding="utf-8", newline="\n") as f:
                f.write("\n".join(lines) + "\n")
        if manifest.vocab_path is not None:
            with open(out_dir / manifest.vocab_path, "w", encoding="utf-8", newline="\n") as f:
                f.write("\n".join(corpus.vocab.tokens[1:]) + "\n")
        manifest_path = out_dir / "manifest.json"
        with open(manifest_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(json.dumps(manifest.model_dump(mode="json"), indent=2) + "\n")
    except OSError as e:
        raise FileError(f"Cannot write corpus to {out_dir}: {e}") from e
    logger.info(f"Wrote corpus to {out_dir}")
    return manifest_path
