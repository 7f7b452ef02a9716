"""Corpus ingestion: JSONL splits, label validation and tokenization."""
import json
import logging
from collections import Counter
from pathlib import Path
from typing import Iterable

from src.data.tokenizer import Vocabulary, tokenize
from src.exceptions import FileError, ManifestError, ParseError, SplitViolationError
from src.models.prototypes import SCENARIO_PROMPT
from src.schemas.data import DatasetManifest, Sample
from src.schemas.enums import Split

logger = logging.getLogger(__name__)


class LabeledCorpus:
    """Tokenized samples of all splits plus their vocabulary."""

    def __init__(self, manifest: DatasetManifest, vocab: Vocabulary, samples: list[Sample]):
        self.manifest = manifest
        self.vocab = vocab
        self.samples = samples
        self.class_index = {name: i for i, name in enumerate(manifest.id_classes)}

    @property
    def classes(self) -> list[str]:
        return list(self.manifest.id_classes)

    def split(self, split: Split) -> list[Sample]:
        return [s for s in self.samples if s.split is split]

    def labels(self, samples: Iterable[Sample]) -> list[int]:
        """Class indices of ID samples."""
        return [self.class_index[s.label] for s in samples]

    def counts(self) -> dict[str, int]:
        counter = Counter(s.split.value for s in self.samples)
        return {split.value: counter.get(split.value, 0) for split in Split}

    def replace_samples(self, samples: list[Sample]) -> "LabeledCorpus":
        return LabeledCorpus(self.manifest, self.vocab, samples)


def build_vocabulary(
    manifest: DatasetManifest,
    train_texts: Iterable[str],
    max_len: int | None = None,
    base_tokens: Iterable[str] = (),
) -> Vocabulary:
    """
    Vocabulary over ID training text, ID class names and the scenario prompt.

    `base_tokens` is a label-free word list (the manifest's `vocab_path`) that
    stands in for a pretrained tokenizer's vocabulary; without it every word
    seen only in test maps to <unk>.
    """
    tokens = list(base_tokens)
    tokens.extend(tok for text in train_texts for tok in tokenize(text))
    for name in manifest.id_classes:
        tokens.extend(tokenize(name))
    tokens.extend(tokenize(SCENARIO_PROMPT.format(scenario=manifest.scenario)))
    return Vocabulary(tokens, max_len=max_len)


def build_corpus(
    manifest: DatasetManifest,
    rows: dict[Split, list[dict]],
    max_seq_len: int | None = None,
    base_tokens: Iterable[str] = (),
) -> LabeledCorpus:
    """
    Validate labels against the manifest and tokenize every row.

    Raises:
        ParseError: If an utterance has no tokens
        ManifestError: If a label is in neither class list
        SplitViolationError: If an OOD label occurs in train or val
    """
    id_classes = set(manifest.id_classes)
    known = id_classes | set(manifest.ood_classes)
    for split, split_rows in rows.items():
        for line_no, row in enumerate(split_rows, start=1):
            label = row["label"]
            if not tokenize(row["text"]):
                raise ParseError(f"{split.value} row {line_no}: utterance has no tokens")
            if label not in known:
                raise ManifestError(f"{split.value} row {line_no}: unknown label {label!r}")
            if split is not Split.TEST and label not in id_classes:
                raise SplitViolationError(
                    f"{split.value} row {line_no}: OOD label {label!r} outside the test split"
                )

    vocab = build_vocabulary(
        manifest,
        (row["text"] for row in rows.get(Split.TRAIN, [])),
        max_len=max_seq_len,
        base_tokens=base_tokens,
    )
    samples = [
        Sample(
            sample_id=f"{split.value}-{i:05d}",
            text=row["text"],
            token_ids=tuple(vocab.encode(row["text"])),
            label=row["label"],
            split=split,
            is_id=row["label"] in id_classes,
        )
        for split in Split
        for i, row in enumerate(rows.get(split, []))
    ]
    corpus = LabeledCorpus(manifest, vocab, samples)
    logger.info(f"Corpus {manifest.scenario}: {corpus.counts()} samples, vocab {len(vocab)}")
    return corpus


def read_jsonl(path: str | Path) -> list[dict]:
    """
    Rows of a `{"text": ..., "label": ...}` JSON Lines file.

    Raises:
        FileError: If the file cannot be read
        ParseError: If the file is empty or a row is malformed
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise FileError(f"Cannot read corpus file {path}: {e}") from e
    rows = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}:{line_no}: invalid JSON ({e.msg})") from e
        if not isinstance(row, dict) or not isinstance(row.get("text"), str) or not isinstance(
            row.get("label"), str
        ):
            raise ParseError(f"{path}:{line_no}: expected string fields 'text' and 'label'")
        rows.append(row)
    if not rows:
        raise ParseError(f"Corpus file {path} is empty")
    return rows


def read_word_list(path: str | Path) -> list[str]:
    """
    One token per line; blank lines are skipped.

    Raises:
        FileError: If the file cannot be read
        ParseError: If a line holds more than one token
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise FileError(f"Cannot read word list {path}: {e}") from e
    words = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        tokens = tokenize(line)
        if len(tokens) != 1:
            raise ParseError(f"{path}:{line_no}: expected one token, got {line.strip()!r}")
        words.append(tokens[0])
    return words


def load_corpus(manifest: DatasetManifest, max_seq_len: int | None = None) -> LabeledCorpus:
    """Read the files named by the manifest and build the corpus."""
    rows = {
        Split.TRAIN: read_jsonl(manifest.train_path),
        Split.VAL: read_jsonl(manifest.val_path),
        Split.TEST: read_jsonl(manifest.test_path),
    }
    base_tokens = read_word_list(manifest.vocab_path) if manifest.vocab_path else []
    return build_corpus(manifest, rows, max_seq_len=max_seq_len, base_tokens=base_tokens)
