"""Pytest configuration and fixtures."""
import numpy as np
import pytest

from src.data.synth import synth_corpus, write_corpus
from src.models.encoder import EncoderModel
from src.schemas.encoder import EncoderConfig
from src.schemas.experiment import RunSpec
from src.schemas.metrics import ScoredSample


@pytest.fixture
def rng():
    """Seeded generator for random test inputs."""
    return np.random.default_rng(0)


@pytest.fixture
def tiny_config():
    """Two-block, two-head encoder small enough for exhaustive checks."""
    return EncoderConfig(
        vocab_size=32,
        embed_dim=8,
        n_layers=2,
        n_heads=2,
        mlp_ratio=2,
        lora_rank=2,
        lora_alpha=2.0,
        max_seq_len=16,
    )


@pytest.fixture
def tiny_model(tiny_config):
    """Encoder with adapters seeded at 1."""
    return EncoderModel(tiny_config, adapter_seed=1)


@pytest.fixture
def synthetic():
    """(manifest, corpus) with 3 ID and 2 OOD classes, 6 train rows per ID class."""
    return synth_corpus(k_id=3, k_ood=2, per_class=6, vocab_size=60, overlap=0.3, seed=1)


@pytest.fixture
def manifest_path(synthetic, tmp_path):
    """The synthetic corpus written to disk."""
    manifest, corpus = synthetic
    return write_corpus(manifest, corpus, tmp_path / "corpus")


@pytest.fixture
def small_spec(manifest_path, tmp_path):
    """A two-shot, two-epoch run spec over the synthetic corpus."""
    return RunSpec(
        manifest=str(manifest_path),
        shots=2,
        seeds=[1],
        epochs=2,
        batch_size=4,
        lr=1e-2,
        embed_dim=8,
        n_layers=1,
        n_heads=2,
        mlp_ratio=2,
        lora_rank=2,
        lora_alpha=2.0,
        max_seq_len=16,
        out=str(tmp_path / "runs"),
    )


def scored(id_scores, ood_scores, predicted=None, true=None):
    """ScoredSample list: ID rows first (class 0 unless given), then OOD rows."""
    predicted = predicted or [0] * len(id_scores)
    true = true or [0] * len(id_scores)
    samples = [
        ScoredSample(score=s, is_id=True, predicted_class=p, true_class=t)
        for s, p, t in zip(id_scores, predicted, true)
    ]
    samples.extend(ScoredSample(score=s, is_id=False) for s in ood_scores)
    return samples


@pytest.fixture
def make_scored():
    """Builder for ScoredSample lists."""
    return scored
