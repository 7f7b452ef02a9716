"""Seeded few-shot selection of ID training and validation samples."""
import logging

import numpy as np

from src.data.corpus import LabeledCorpus
from src.exceptions import SamplingError
from src.schemas.data import Sample
from src.schemas.enums import Split

logger = logging.getLogger(__name__)

_SPLIT_STREAM = {Split.TRAIN: 0, Split.VAL: 1}


def _select(samples: list[Sample], class_id: int, split: Split, shots: int, seed: int) -> list[int]:
    # One stream per (seed, split, class): the selection for k shots is a prefix of
    # the selection for k+1
    rng = np.random.default_rng([seed, _SPLIT_STREAM[split], class_id])
    order = rng.permutation(len(samples))
    return sorted(order[:shots].tolist())


def few_shot_sample(corpus: LabeledCorpus, shots: int | str, seed: int) -> LabeledCorpus:
    """
    Keep `shots` train and `shots` validation samples per ID class; test untouched.

    Args:
        corpus: Full corpus
        shots: Per-class count, or "full" for the identity
        seed: Selection seed

    Raises:
        SamplingError: If a class has fewer than `shots` samples in train or val
    """
    if shots == "full":
        return corpus
    if not isinstance(shots, int) or shots < 1:
        raise SamplingError(f"shots must be a positive integer or 'full', got {shots!r}")

    kept: set[str] = set()
    for split in (Split.TRAIN, Split.VAL):
        pool = corpus.split(split)
        for class_id, name in enumerate(corpus.classes):
            members = [s for s in pool if s.label == name]
            if len(members) < shots:
                raise SamplingError(
                    f"Class {name!r} has {len(members)} {split.value} samples, {shots} requested"
                )
            picks = _select(members, class_id, split, shots, seed)
            kept.update(members[i].sample_id for i in picks)

    samples = [s for s in corpus.samples if s.split is Split.TEST or s.sample_id in kept]
    logger.info(f"Sampled {shots}-shot subset with seed {seed}")
    return corpus.replace_samples(samples)
