"""Tests for tokenization, corpus ingestion, few-shot sampling and synthetic corpora."""
import json

import pytest

from src.data.corpus import build_corpus, load_corpus, read_jsonl, read_word_list
from src.data.sampling import few_shot_sample
from src.data.synth import synth_corpus, write_corpus
from src.data.tokenizer import UNK_ID, Vocabulary, tokenize
from src.exceptions import (
    ConfigError,
    FileError,
    ManifestError,
    ParseError,
    SamplingError,
    SplitViolationError,
    VocabError,
)
from src.schemas.data import DatasetManifest
from src.schemas.enums import Split


@pytest.fixture
def manifest():
    return DatasetManifest(
        scenario="travel",
        id_classes=["book flight", "cancel"],
        ood_classes=["weather"],
        train_path="train.jsonl",
        val_path="val.jsonl",
        test_path="test.jsonl",
    )


# ─── Tokenizer ──────────────────────────────────────────────────────────────


def test_tokenize_lowercases_and_splits_punctuation():
    """Test word runs and single punctuation marks."""
    assert tokenize("Book a Flight, please!") == ["book", "a", "flight", ",", "please", "!"]


def test_vocabulary_independent_of_order():
    """Test that ids depend only on the token set."""
    a = Vocabulary(["b", "a", "c", "a"])
    b = Vocabulary(["c", "b", "a"])
    assert a.tokens == b.tokens
    assert a.encode("a b c") == b.encode("a b c") == [1, 2, 3]


def test_vocabulary_unknown_and_truncation():
    """Test that unknown tokens map to 0 and encode honors max_len."""
    vocab = Vocabulary(["hello", "world"], max_len=2)
    assert vocab.encode("hello there world") == [1, UNK_ID]
    assert "hello" in vocab
    assert len(vocab) == 3


def test_vocabulary_decode_out_of_range():
    """Test that decoding an unknown id fails."""
    vocab = Vocabulary(["x"])
    assert vocab.decode([1, 0]) == "x <unk>"
    with pytest.raises(VocabError):
        vocab.decode([2])


# ─── Corpus ─────────────────────────────────────────────────────────────────


def test_build_corpus_rejects_ood_in_train(manifest):
    """Test that an OOD label outside the test split is a split violation."""
    rows = {Split.TRAIN: [{"text": "rain today", "label": "weather"}]}
    with pytest.raises(SplitViolationError):
        build_corpus(manifest, rows)


def test_build_corpus_rejects_unknown_label(manifest):
    """Test that a label in neither class list is a manifest error."""
    rows = {Split.TEST: [{"text": "hi", "label": "greeting"}]}
    with pytest.raises(ManifestError):
        build_corpus(manifest, rows)


def test_build_corpus_rejects_empty_utterance(manifest):
    """Test that a whitespace-only utterance cannot be tokenized."""
    rows = {Split.VAL: [{"text": "   ", "label": "cancel"}]}
    with pytest.raises(ParseError):
        build_corpus(manifest, rows)


def test_vocabulary_excludes_ood_only_tokens(manifest):
    """Test that test-only OOD words stay unknown."""
    rows = {
        Split.TRAIN: [{"text": "book my flight", "label": "book flight"}],
        Split.VAL: [{"text": "cancel it", "label": "cancel"}],
        Split.TEST: [{"text": "sunny forecast", "label": "weather"}],
    }
    corpus = build_corpus(manifest, rows)
    assert "sunny" not in corpus.vocab
    assert "travel" in corpus.vocab
    assert "cancel" in corpus.vocab
    test_sample = corpus.split(Split.TEST)[0]
    assert test_sample.token_ids == (UNK_ID, UNK_ID)
    assert test_sample.is_id is False
    assert test_sample.sample_id == "test-00000"


def test_base_word_list_keeps_test_words_known(manifest):
    """Test that words from the base list are in vocabulary even if only test uses them."""
    rows = {
        Split.TRAIN: [{"text": "book my flight", "label": "book flight"}],
        Split.TEST: [{"text": "sunny forecast", "label": "weather"}],
    }
    corpus = build_corpus(manifest, rows, base_tokens=["sunny", "forecast"])
    assert UNK_ID not in corpus.split(Split.TEST)[0].token_ids
    assert "travel" in corpus.vocab


def test_read_word_list(tmp_path):
    """Test one token per line, blank lines skipped, and the two failure modes."""
    path = tmp_path / "vocab.txt"
    path.write_text("alpha\n\nBeta\n")
    assert read_word_list(path) == ["alpha", "beta"]
    path.write_text("alpha\ntwo words\n")
    with pytest.raises(ParseError, match=":2:"):
        read_word_list(path)
    with pytest.raises(FileError):
        read_word_list(tmp_path / "missing.txt")


def test_manifest_file_errors(tmp_path):
    """Test missing files, bad JSON and invalid class lists."""
    with pytest.raises(ParseError):
        DatasetManifest.from_file(tmp_path / "missing.json")
    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{not json")
    with pytest.raises(ParseError):
        DatasetManifest.from_file(bad_json)
    overlapping = tmp_path / "overlap.json"
    overlapping.write_text(
        json.dumps(
            {
                "scenario": "s",
                "id_classes": ["a"],
                "ood_classes": ["a"],
                "train_path": "t",
                "val_path": "v",
                "test_path": "x",
            }
        )
    )
    with pytest.raises(ManifestError):
        DatasetManifest.from_file(overlapping)


def test_read_jsonl_errors(tmp_path):
    """Test unreadable, empty and malformed JSON Lines files."""
    with pytest.raises(FileError):
        read_jsonl(tmp_path / "none.jsonl")
    empty = tmp_path / "empty.jsonl"
    empty.write_text("\n\n")
    with pytest.raises(ParseError):
        read_jsonl(empty)
    malformed = tmp_path / "bad.jsonl"
    malformed.write_text('{"text": "hi"}\n')
    with pytest.raises(ParseError):
        read_jsonl(malformed)


def test_load_corpus_from_manifest(manifest_path):
    """Test that relative split paths resolve next to the manifest."""
    corpus = load_corpus(DatasetManifest.from_file(manifest_path))
    assert corpus.counts() == {"train": 18, "val": 9, "test": 15}
    assert sum(1 for s in corpus.split(Split.TEST) if not s.is_id) == 6


def test_load_corpus_reads_the_word_list(synthetic, manifest_path):
    """Test that a written synthetic corpus reloads with the same vocabulary and ids."""
    _, corpus = synthetic
    manifest = DatasetManifest.from_file(manifest_path)
    assert manifest.vocab_path == str(manifest_path.parent / "vocab.txt")
    loaded = load_corpus(manifest)
    assert loaded.vocab.tokens == corpus.vocab.tokens
    assert [s.token_ids for s in loaded.samples] == [s.token_ids for s in corpus.samples]


# ─── Sampling ───────────────────────────────────────────────────────────────


def test_few_shot_counts(synthetic):
    """Test that k shots keep k train and k val rows per class and every test row."""
    _, corpus = synthetic
    sampled = few_shot_sample(corpus, 2, seed=1)
    for split in (Split.TRAIN, Split.VAL):
        labels = [s.label for s in sampled.split(split)]
        assert all(labels.count(name) == 2 for name in corpus.classes)
    assert sampled.split(Split.TEST) == corpus.split(Split.TEST)


def test_few_shot_prefix_property(synthetic):
    """Test that the k-shot selection is contained in the (k+1)-shot selection."""
    _, corpus = synthetic
    for seed in range(5):
        small = {s.sample_id for s in few_shot_sample(corpus, 1, seed).samples}
        large = {s.sample_id for s in few_shot_sample(corpus, 2, seed).samples}
        assert small <= large


def test_few_shot_deterministic(synthetic):
    """Test that the same seed selects the same rows."""
    _, corpus = synthetic
    a = few_shot_sample(corpus, 2, seed=7)
    b = few_shot_sample(corpus, 2, seed=7)
    assert [s.sample_id for s in a.samples] == [s.sample_id for s in b.samples]


def test_few_shot_full_is_identity(synthetic):
    """Test that 'full' returns the corpus unchanged."""
    _, corpus = synthetic
    assert few_shot_sample(corpus, "full", seed=1) is corpus


def test_few_shot_errors(synthetic):
    """Test too many shots and invalid shot values."""
    _, corpus = synthetic
    with pytest.raises(SamplingError):
        few_shot_sample(corpus, 4, seed=1)
    with pytest.raises(SamplingError):
        few_shot_sample(corpus, 0, seed=1)


# ─── Synthetic corpora ──────────────────────────────────────────────────────


def test_synth_deterministic(synthetic):
    """Test that a seed reproduces every utterance."""
    _, corpus = synthetic
    _, again = synth_corpus(k_id=3, k_ood=2, per_class=6, vocab_size=60, overlap=0.3, seed=1)
    assert [s.text for s in again.samples] == [s.text for s in corpus.samples]


def test_synth_zero_overlap_uses_class_pools():
    """Test that without overlap each utterance draws only from its class pool."""
    manifest, corpus = synth_corpus(
        k_id=2, k_ood=1, per_class=5, vocab_size=40, overlap=0.0, seed=3
    )
    pool_size = 40 // 4
    for sample in corpus.samples:
        owner = (manifest.id_classes + manifest.ood_classes).index(sample.label)
        indices = [int(word[3:]) for word in sample.text.split()]
        assert all(owner * pool_size <= i < (owner + 1) * pool_size for i in indices)
        assert 4 <= len(indices) <= 12


def test_synth_rejects_infeasible_inputs():
    """Test a vocabulary too small for the pools and an out-of-range overlap."""
    with pytest.raises(ConfigError, match="vocab_size"):
        synth_corpus(k_id=5, k_ood=5, per_class=3, vocab_size=20, overlap=0.1, seed=1)
    with pytest.raises(ConfigError):
        synth_corpus(k_id=2, k_ood=1, per_class=3, vocab_size=40, overlap=1.5, seed=1)


def test_write_corpus_is_byte_stable(synthetic, tmp_path):
    """Test that writing the same corpus twice gives identical files."""
    manifest, corpus = synthetic
    first = write_corpus(manifest, corpus, tmp_path / "a").parent
    second = write_corpus(manifest, corpus, tmp_path / "b").parent
    for name in ("manifest.json", "train.jsonl", "val.jsonl", "test.jsonl", "vocab.txt"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_synth_vocabulary_covers_ood_pools(synthetic):
    """Test that OOD test utterances encode without unknown tokens."""
    manifest, corpus = synthetic
    assert manifest.vocab_path == "vocab.txt"
    ood = [s for s in corpus.split(Split.TEST) if not s.is_id]
    assert ood
    assert all(UNK_ID not in s.token_ids for s in ood)
    assert len({s.token_ids for s in ood}) > 1
