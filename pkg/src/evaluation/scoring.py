"""Post-hoc OOD scoring against a validation bank and nearest-prototype classification."""
import logging
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from src.exceptions import CompatibilityError, DegenerateVectorError, FileError, StateError
from src.models.checkpoint import read_archive, write_archive
from src.models.encoder import EncoderModel
from src.numerics.ops import NORM_FLOOR, cosine_values
from src.numerics.tensor import Tensor
from src.schemas.data import Sample

logger = logging.getLogger(__name__)

BANK_TENSOR = "bank.vectors"
PROTOTYPE_PREFIX = "proto:"


def _as_array(value) -> np.ndarray:
    return value.data if isinstance(value, Tensor) else np.asarray(value, dtype=np.float64)


class RepresentationBank:
    """
    Stored validation representations z_i^val (V×d) with per-row provenance.

    Rows are kept raw (not normalized). Immutable after construction.
    """

    def __init__(self, vectors: np.ndarray, source_ids: Sequence[str]):
        vectors = np.array(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] == 0:
            raise StateError(f"A bank needs at least one row, got shape {vectors.shape}")
        if len(source_ids) != vectors.shape[0]:
            raise StateError(f"{len(source_ids)} source ids for {vectors.shape[0]} bank rows")
        norms = np.linalg.norm(vectors, axis=1)
        if norms.min() < NORM_FLOOR:
            raise DegenerateVectorError(f"Bank row {int(norms.argmin())} has zero norm")
        vectors.setflags(write=False)
        self.vectors = vectors
        self.source_ids = list(source_ids)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def extend(self, vectors: np.ndarray, source_ids: Sequence[str]) -> "RepresentationBank":
        return RepresentationBank(
            np.vstack([self.vectors, np.atleast_2d(vectors)]), [*self.source_ids, *source_ids]
        )

    def check_disjoint(self, sample_ids: Iterable[str]) -> None:
        """
        Raises:
            CompatibilityError: If any of `sample_ids` is already a bank row
        """
        overlap = set(self.source_ids) & set(sample_ids)
        if overlap:
            raise CompatibilityError(
                f"{len(overlap)} scored samples are bank rows, e.g. {sorted(overlap)[0]}"
            )

    def save(self, path: str | Path) -> None:
        write_archive(path, {BANK_TENSOR: self.vectors}, {"source_ids": self.source_ids})
        logger.info(f"Saved bank of {len(self)} rows to {path}")

    @classmethod
    def load(cls, path: str | Path) -> "RepresentationBank":
        """
        Raises:
            FileError: If the archive is unreadable or not a bank
        """
        tensors, meta = read_archive(path)
        if BANK_TENSOR not in tensors or "source_ids" not in meta:
            raise FileError(f"{path} is not a bank archive")
        return cls(np.array(tensors[BANK_TENSOR]), meta["source_ids"])


def build_bank(
    model: EncoderModel,
    val_samples: Sequence[Sample],
    prototypes: np.ndarray | None = None,
    class_names: Sequence[str] | None = None,
) -> RepresentationBank:
    """
    One row per validation sample, from the same representation function as training.

    When `prototypes` is given, its rows are appended with provenance
    "proto:<class>".

    Raises:
        StateError: If there are no validation samples
    """
    if not val_samples:
        raise StateError("Cannot build a bank from an empty validation set")
    vectors = model.encode_batch([s.token_ids for s in val_samples])
    bank = RepresentationBank(vectors, [s.sample_id for s in val_samples])
    if prototypes is not None:
        names = class_names or [str(i) for i in range(len(prototypes))]
        bank = bank.extend(prototypes, [f"{PROTOTYPE_PREFIX}{name}" for name in names])
    logger.info(f"Built bank with {len(bank)} rows")
    return bank


def cosine_score(z, bank: RepresentationBank) -> float:
    """
    max_i cos(z, bank_i), in [−1, 1]; higher is more ID-like.

    Raises:
        StateError: If the bank is empty
        CompatibilityError: If z and the bank rows differ in dimension
        DegenerateVectorError: If z has zero norm
    """
    return float(score_batch(np.atleast_2d(_as_array(z)), bank)[0])


def score_batch(reps: np.ndarray, bank: RepresentationBank | None) -> np.ndarray:
    """cosine_score for every row of an N×d matrix."""
    if bank is None or len(bank) == 0:
        raise StateError("Cannot score against an empty bank")
    reps = np.atleast_2d(_as_array(reps))
    if reps.shape[1] != bank.dim:
        raise CompatibilityError(
            f"Representation dimension {reps.shape[1]} does not match bank dimension {bank.dim}"
        )
    return cosine_values(reps, bank.vectors).max(axis=1)


def classify(z, prototypes) -> int:
    """Index of the most cosine-similar prototype; ties go to the lowest index."""
    return int(classify_batch(np.atleast_2d(_as_array(z)), prototypes)[0])


def classify_batch(reps: np.ndarray, prototypes) -> np.ndarray:
    sims = cosine_values(np.atleast_2d(_as_array(reps)), _as_array(prototypes))
    # argmax returns the first maximal index
    return np.argmax(sims, axis=1)


class IntentRecognizer:
    """
    ID classifier plus OOD rejection: a class index when the cosine score clears
    `threshold`, otherwise None.
    """

    def __init__(
        self,
        model: EncoderModel,
        bank: RepresentationBank,
        classifier: Callable[[np.ndarray], np.ndarray],
        threshold: float,
    ):
        self.model = model
        self.bank = bank
        self.classifier = classifier
        self.threshold = threshold

    def recognize_representations(self, reps: np.ndarray) -> list[int | None]:
        scores = score_batch(reps, self.bank)
        classes = self.classifier(reps)
        return [int(c) if s >= self.threshold else None for s, c in zip(scores, classes)]

    def recognize(self, sequences: Sequence[Sequence[int]]) -> list[int | None]:
        """Decision for each token-id sequence."""
        if not sequences:
            return []
        return self.recognize_representations(self.model.encode_batch(sequences))
