"""Tests for the validation bank, cosine OOD scoring and prototype classification."""
import numpy as np
import pytest

from src.data.synth import synth_corpus
from src.evaluation.metrics import auroc
from src.evaluation.scoring import (
    IntentRecognizer,
    RepresentationBank,
    build_bank,
    classify,
    classify_batch,
    cosine_score,
    score_batch,
)
from src.exceptions import CompatibilityError, DegenerateVectorError, StateError
from src.models.encoder import EncoderModel
from src.schemas.data import Sample
from src.schemas.enums import Split
from src.schemas.metrics import ScoredSample


def _val_sample(i: int, tokens: tuple[int, ...]) -> Sample:
    return Sample(
        sample_id=f"val-{i:05d}",
        text="x",
        token_ids=tokens,
        label="a",
        split=Split.VAL,
        is_id=True,
    )


# ─── Bank ───────────────────────────────────────────────────────────────────


def test_bank_rejects_empty_and_zero_rows():
    """Test that a bank needs rows with non-zero norm."""
    with pytest.raises(StateError):
        RepresentationBank(np.zeros((0, 3)), [])
    with pytest.raises(DegenerateVectorError):
        RepresentationBank(np.array([[1.0, 0.0], [0.0, 0.0]]), ["a", "b"])
    with pytest.raises(StateError):
        RepresentationBank(np.ones((2, 2)), ["only-one"])


def test_bank_is_read_only():
    """Test that stored rows cannot be written through."""
    bank = RepresentationBank(np.ones((2, 2)), ["a", "b"])
    with pytest.raises(ValueError):
        bank.vectors[0, 0] = 5.0


def test_bank_disjointness():
    """Test that scoring a bank row is refused."""
    bank = RepresentationBank(np.ones((2, 2)), ["val-00000", "val-00001"])
    bank.check_disjoint(["test-00000"])
    with pytest.raises(CompatibilityError):
        bank.check_disjoint(["test-00000", "val-00001"])


def test_bank_save_load(tmp_path, rng):
    """Test that a saved bank reloads with the same rows and provenance."""
    bank = RepresentationBank(rng.normal(size=(3, 4)), ["a", "b", "c"])
    bank.save(tmp_path / "bank.safetensors")
    loaded = RepresentationBank.load(tmp_path / "bank.safetensors")
    assert np.array_equal(loaded.vectors, bank.vectors)
    assert loaded.source_ids == ["a", "b", "c"]


def test_build_bank_appends_prototypes(tiny_model):
    """Test one row per validation sample plus labelled prototype rows."""
    samples = [_val_sample(0, (1, 2)), _val_sample(1, (3, 4, 5))]
    protos = np.array([[1.0] * 8, [0.5] * 8])
    bank = build_bank(tiny_model, samples, prototypes=protos, class_names=["a", "b"])
    assert len(bank) == 4
    assert bank.source_ids == ["val-00000", "val-00001", "proto:a", "proto:b"]
    assert np.array_equal(bank.vectors[0], tiny_model.encode_tokens([1, 2]).data)


def test_build_bank_empty_val(tiny_model):
    """Test that no validation samples means no bank."""
    with pytest.raises(StateError):
        build_bank(tiny_model, [])


# ─── Scoring ────────────────────────────────────────────────────────────────


def test_cosine_score_examples():
    """Test scores 1, 0 and 1/√2 against a one- or two-row bank."""
    bank = RepresentationBank(np.array([[1.0, 0.0], [0.0, 1.0]]), ["a", "b"])
    assert cosine_score(np.array([3.0, 0.0]), bank) == 1.0
    single = RepresentationBank(np.array([[1.0, 0.0]]), ["a"])
    assert cosine_score(np.array([0.0, 2.0]), single) == 0.0
    assert cosine_score(np.array([1.0, 1.0]), single) == pytest.approx(0.70710678, abs=1e-8)


def test_score_is_max_over_bank(rng):
    """Test that each score is the best row's cosine."""
    reps = rng.normal(size=(5, 3))
    vectors = rng.normal(size=(4, 3))
    bank = RepresentationBank(vectors, list("abcd"))
    expected = [
        max(float(r @ v / np.linalg.norm(r) / np.linalg.norm(v)) for v in vectors) for r in reps
    ]
    np.testing.assert_allclose(score_batch(reps, bank), expected, rtol=0, atol=1e-12)


def test_score_errors():
    """Test an absent bank, mismatched dimensions and a zero representation."""
    bank = RepresentationBank(np.array([[1.0, 0.0]]), ["a"])
    with pytest.raises(StateError):
        score_batch(np.ones((1, 2)), None)
    with pytest.raises(CompatibilityError):
        cosine_score(np.ones(3), bank)
    with pytest.raises(DegenerateVectorError):
        cosine_score(np.zeros(2), bank)


def test_test_split_as_its_own_bank_scores_one(synthetic, tiny_config):
    """Test that every test utterance scores 1 against a bank built from the test split."""
    _, corpus = synthetic
    model = EncoderModel(tiny_config.model_copy(update={"vocab_size": len(corpus.vocab)}))
    test = corpus.split(Split.TEST)
    bank = build_bank(model, test)
    scores = score_batch(model.encode_batch([s.token_ids for s in test]), bank)
    np.testing.assert_allclose(scores, 1.0, rtol=0, atol=1e-12)


def test_synthetic_ood_scores_vary_and_rank_below_id(tiny_config):
    """Test that OOD utterances keep distinct scores and rank below ID ones without overlap."""
    _, corpus = synth_corpus(k_id=3, k_ood=2, per_class=12, vocab_size=60, overlap=0.0, seed=2)
    config = tiny_config.model_copy(update={"vocab_size": len(corpus.vocab), "embed_dim": 32})
    model = EncoderModel(config)
    bank = build_bank(model, corpus.split(Split.VAL))
    test = corpus.split(Split.TEST)
    scores = score_batch(model.encode_batch([s.token_ids for s in test]), bank)
    ood_scores = [float(v) for s, v in zip(test, scores) if not s.is_id]
    assert len(set(ood_scores)) > 1
    samples = [
        ScoredSample(
            score=float(v),
            is_id=s.is_id,
            predicted_class=0 if s.is_id else None,
            true_class=0 if s.is_id else None,
        )
        for s, v in zip(test, scores)
    ]
    assert auroc(samples) > 0.5


# ─── Classification ─────────────────────────────────────────────────────────


def test_classify_nearest_prototype():
    """Test that the most similar prototype wins regardless of norm."""
    protos = np.array([[10.0, 0.0], [0.0, 0.1]])
    assert classify(np.array([0.2, 1.0]), protos) == 1
    assert classify(np.array([1.0, 0.2]), protos) == 0


def test_classify_tie_goes_to_lowest_index():
    """Test that identical prototypes resolve to the first."""
    protos = np.array([[1.0, 1.0], [2.0, 2.0], [1.0, 1.0]])
    assert classify(np.array([1.0, 1.0]), protos) == 0


def test_recognizer_rejects_low_scores():
    """Test that rows below the threshold come back as None."""
    bank = RepresentationBank(np.array([[1.0, 0.0]]), ["a"])
    protos = np.array([[1.0, 0.0], [0.0, 1.0]])
    recognizer = IntentRecognizer(
        model=None, bank=bank, classifier=lambda r: classify_batch(r, protos), threshold=0.5
    )
    assert recognizer.recognize_representations(np.array([[1.0, 0.1], [0.0, 1.0]])) == [0, None]


def test_recognizer_on_token_sequences(tiny_model):
    """Test that bank members are recognized and an empty request is empty."""
    samples = [_val_sample(0, (1, 2, 3)), _val_sample(1, (4, 5))]
    bank = build_bank(tiny_model, samples)
    recognizer = IntentRecognizer(tiny_model, bank, lambda r: np.zeros(len(r), int), 0.99)
    assert recognizer.recognize([[1, 2, 3], [4, 5]]) == [0, 0]
    assert recognizer.recognize([]) == []
