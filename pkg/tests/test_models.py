"""Tests for the encoder, LoRA projections, class prototypes and checkpoints."""
import numpy as np
import pytest

from src.data.tokenizer import Vocabulary
from src.exceptions import (
    CompatibilityError,
    ConfigError,
    DimensionError,
    FileError,
    LengthError,
    ShapeError,
    VocabError,
)
from src.models.checkpoint import (
    load_checkpoint,
    read_archive,
    save_checkpoint,
    write_archive,
)
from src.models.encoder import EncoderModel
from src.models.head import ClassifierHead
from src.models.lora import LoraLinear, lora_forward
from src.models.prototypes import compute_prototypes, init_prototype_set
from src.numerics import ops
from src.numerics.gradcheck import check_gradients
from src.numerics.tensor import Tensor
from src.schemas.enums import PrototypeVariant, RepLayer


@pytest.fixture
def vocab():
    """Vocabulary covering the class names and the banking prompt."""
    return Vocabulary(["banking", "intent", "of", "transactions", "book", "flight", "balance"])


# ─── LoRA ───────────────────────────────────────────────────────────────────


def test_lora_zero_b_equals_frozen_path(rng):
    """Test that B = 0 gives exactly W·x."""
    layer = LoraLinear(rng.normal(size=(3, 4)), rank=2, alpha=2.0, rng=rng)
    x = Tensor(rng.normal(size=(5, 4)))
    out = lora_forward(layer, x)
    assert np.array_equal(out.data, x.data @ layer.weight.data.T)


def test_lora_hand_example(rng):
    """Test W=I₂, A=[[1,0]], B=[[0],[1]], α=r=1, x=(1,0) → (1,1)."""
    layer = LoraLinear(np.eye(2), rank=1, alpha=1.0, rng=rng)
    layer.lora_a.data[...] = [[1.0, 0.0]]
    layer.lora_b.data[...] = [[0.0], [1.0]]
    out = lora_forward(layer, Tensor([1.0, 0.0]))
    assert np.array_equal(out.data, np.array([1.0, 1.0]))


def test_lora_shape_mismatch(rng):
    """Test that the trailing dimension must be d_in."""
    layer = LoraLinear(rng.normal(size=(3, 4)), rank=2, alpha=2.0, rng=rng)
    with pytest.raises(DimensionError):
        lora_forward(layer, Tensor(np.ones(3)))


def test_lora_only_adapters_trainable(tiny_model):
    """Test that exactly the A/B matrices of q, k, v, o are trainable."""
    names = set(tiny_model.trainable_parameters())
    assert len(names) == tiny_model.config.n_layers * 4 * 2
    assert all(n.endswith((".lora_a", ".lora_b")) for n in names)
    assert not any(t.requires_grad for t in tiny_model.frozen_parameters().values())


# ─── Encoder ────────────────────────────────────────────────────────────────


def test_encoder_zero_b_matches_base_model(tiny_model):
    """Test that with B = 0 the adapted and frozen-only outputs agree exactly."""
    tokens = [3, 7, 1, 4]
    adapted = tiny_model.encode_tokens(tokens).data
    tiny_model.set_adapters_enabled(False)
    base = tiny_model.encode_tokens(tokens).data
    assert np.array_equal(adapted, base)


def test_encoder_embeddings_path_matches_tokens(tiny_model):
    """Test that feeding embedding rows reproduces encode_tokens bit-exactly."""
    tokens = [5, 2, 9]
    rows = Tensor(tiny_model.embedding.data[tokens])
    assert np.array_equal(
        tiny_model.encode_embeddings(rows).data, tiny_model.encode_tokens(tokens).data
    )


def test_encoder_causality(tiny_model):
    """Test that appending a token changes the output but not prefix states."""
    tokens = [3, 7, 1]
    short = tiny_model.hidden_states(tiny_model.embed(tokens))
    long = tiny_model.hidden_states(tiny_model.embed(tokens + [6]))
    for prefix_state, full_state in zip(short, long):
        np.testing.assert_allclose(prefix_state.data, full_state.data[:3], rtol=0, atol=1e-12)
    assert not np.allclose(
        tiny_model.encode_tokens(tokens).data, tiny_model.encode_tokens(tokens + [6]).data
    )


def test_encoder_deterministic_backbone(tiny_config):
    """Test that the backbone depends only on backbone_seed."""
    a = EncoderModel(tiny_config, adapter_seed=1)
    b = EncoderModel(tiny_config, adapter_seed=2)
    assert np.array_equal(a.embedding.data, b.embedding.data)
    assert np.array_equal(a.encode_tokens([1, 2]).data, b.encode_tokens([1, 2]).data)


def test_encoder_penultimate_layer(tiny_config):
    """Test that rep_layer=penultimate reads the earlier block."""
    final = EncoderModel(tiny_config)
    penult = EncoderModel(tiny_config.model_copy(update={"rep_layer": RepLayer.PENULTIMATE}))
    tokens = [1, 2]
    assert not np.array_equal(final.encode_tokens(tokens).data, penult.encode_tokens(tokens).data)


def test_encoder_input_errors(tiny_model):
    """Test empty, out-of-vocabulary, too-long and mis-shaped inputs."""
    with pytest.raises(LengthError):
        tiny_model.encode_tokens([])
    with pytest.raises(VocabError):
        tiny_model.encode_tokens([tiny_model.config.vocab_size])
    with pytest.raises(LengthError):
        tiny_model.encode_tokens([1] * (tiny_model.config.max_seq_len + 1))
    with pytest.raises(ShapeError):
        tiny_model.encode_embeddings(Tensor(np.ones((2, 3))))


def test_encoder_gradients_wrt_adapters(tiny_model, rng):
    """Test d cos(g(tokens), target) / d(A, B) against finite differences."""
    tiny_model.embedding.data[...] = rng.normal(size=tiny_model.embedding.shape)
    for proj in tiny_model.lora_layers():
        proj.lora_b.data[...] = rng.normal(0.0, 0.1, proj.lora_b.shape)
    target = Tensor(rng.normal(size=tiny_model.config.embed_dim))
    layer = tiny_model.lora_layers()[0]
    results = check_gradients(
        lambda: ops.cosine(tiny_model.encode_tokens([4, 8, 2]), target),
        {"a": layer.lora_a, "b": layer.lora_b},
    )
    assert all(r.passed for r in results), results


def test_encoder_state_roundtrip(tiny_config, tiny_model):
    """Test that load_state_dict restores every tensor."""
    other = EncoderModel(tiny_config.model_copy(update={"backbone_seed": 9}), adapter_seed=5)
    other.load_state_dict(tiny_model.state_dict())
    tokens = [1, 2, 3]
    assert np.array_equal(other.encode_tokens(tokens).data, tiny_model.encode_tokens(tokens).data)


def test_encoder_state_shape_mismatch(tiny_config, tiny_model):
    """Test that a checkpoint of another size is refused."""
    bigger = EncoderModel(tiny_config.model_copy(update={"vocab_size": 40}))
    with pytest.raises(DimensionError):
        bigger.load_state_dict(tiny_model.state_dict())


# ─── Prototypes ─────────────────────────────────────────────────────────────


def test_name_only_sequence_is_name_tokens(tiny_model, vocab):
    """Test that name-only prototypes reduce to encode_tokens of the name."""
    protos = init_prototype_set(
        ["transactions"], PrototypeVariant.NAME_ONLY, "banking", 0, tiny_model, vocab
    )
    assert protos.name_token_ids == [vocab.encode("transactions")]
    assert protos.parameters() == {}
    row = compute_prototypes(protos, tiny_model).data[0]
    assert np.array_equal(row, tiny_model.encode_tokens(vocab.encode("transactions")).data)


def test_scenario_init_uses_prompt_embeddings(tiny_model, vocab):
    """Test that soft token 1 is the embedding of the prompt's first token."""
    protos = init_prototype_set(
        ["balance", "book flight"], PrototypeVariant.SCENARIO, "banking", 4, tiny_model, vocab
    )
    prompt = vocab.encode("banking intent of")
    block = protos.soft_tokens[0].data
    assert np.array_equal(block[0], tiny_model.embedding.data[prompt[0]])
    # cycled to M = 4
    assert np.array_equal(block[3], tiny_model.embedding.data[prompt[0]])
    assert np.array_equal(protos.soft_tokens[1].data, block)
    assert protos.soft_tokens[0] is not protos.soft_tokens[1]


def test_sequence_layout(tiny_model, vocab):
    """Test token count M + len(name ids), multi-token names kept whole."""
    protos = init_prototype_set(
        ["balance", "book flight"], PrototypeVariant.RANDOM_NAME, "banking", 3, tiny_model, vocab
    )
    assert protos.sequence_length(0) == 4
    assert protos.sequence_length(1) == 5
    assert protos.sequence_embeddings(1, tiny_model).shape == (5, tiny_model.config.embed_dim)


def test_random_init_seeding(tiny_model, vocab):
    """Test that equal seeds give equal blocks and different seeds differ."""
    def block(seed):
        protos = init_prototype_set(
            ["balance"], PrototypeVariant.RANDOM, "banking", 2, tiny_model, vocab, seed=seed
        )
        return protos.soft_tokens[0].data

    assert np.array_equal(block(3), block(3))
    assert not np.array_equal(block(3), block(4))


def test_random_variant_has_no_name_tokens(tiny_model, vocab):
    """Test that the random variant drops the class name."""
    protos = init_prototype_set(
        ["balance"], PrototypeVariant.RANDOM, "banking", 2, tiny_model, vocab
    )
    assert protos.sequence_length(0) == 2


def test_shared_soft_tokens(tiny_model, vocab):
    """Test that shared mode uses one trainable block for all classes."""
    protos = init_prototype_set(
        ["balance", "transactions"],
        PrototypeVariant.RANDOM_NAME,
        "banking",
        2,
        tiny_model,
        vocab,
        shared=True,
    )
    assert list(protos.parameters()) == ["proto.soft.shared"]
    assert protos.soft_tokens[0] is protos.soft_tokens[1]


def test_identical_classes_identical_rows(tiny_model, vocab):
    """Test that equal names and equal blocks give equal prototypes."""
    protos = init_prototype_set(
        ["balance", "balance"], PrototypeVariant.SCENARIO, "banking", 2, tiny_model, vocab
    )
    rows = compute_prototypes(protos, tiny_model).data
    assert np.array_equal(rows[0], rows[1])


def test_prototype_init_errors(tiny_model, vocab):
    """Test empty classes, name-only with M>0, M=0 with soft tokens, and empty names."""
    with pytest.raises(ConfigError):
        init_prototype_set([], PrototypeVariant.SCENARIO, "banking", 2, tiny_model, vocab)
    with pytest.raises(ConfigError):
        init_prototype_set(["balance"], PrototypeVariant.NAME_ONLY, "banking", 2, tiny_model, vocab)
    with pytest.raises(ConfigError):
        init_prototype_set(["balance"], PrototypeVariant.RANDOM, "banking", 0, tiny_model, vocab)
    with pytest.raises(ConfigError):
        init_prototype_set(["   "], PrototypeVariant.SCENARIO, "banking", 2, tiny_model, vocab)


def test_prototype_too_long(tiny_model, vocab):
    """Test that a sequence beyond max_seq_len is a length error."""
    protos = init_prototype_set(
        ["balance"], PrototypeVariant.RANDOM_NAME, "banking", 16, tiny_model, vocab
    )
    with pytest.raises(LengthError):
        compute_prototypes(protos, tiny_model)


def test_prototype_gradients_wrt_soft_tokens(tiny_model, vocab, rng):
    """Test d prototype / d soft token against finite differences."""
    # unit-scale rows keep a 1e-3 step in the linear regime
    tiny_model.embedding.data[...] = rng.normal(size=tiny_model.embedding.shape)
    protos = init_prototype_set(
        ["balance", "book flight"], PrototypeVariant.SCENARIO, "banking", 2, tiny_model, vocab
    )
    weights = Tensor(rng.normal(size=(2, tiny_model.config.embed_dim)))
    results = check_gradients(
        lambda: ops.sum(ops.mul(compute_prototypes(protos, tiny_model), weights)),
        protos.parameters(),
    )
    assert all(r.passed for r in results), results


# ─── Head ───────────────────────────────────────────────────────────────────


def test_head_shapes_and_errors():
    """Test vector and batch logits and the dimension check."""
    head = ClassifierHead(4, 8, seed=0)
    assert head(Tensor(np.ones(8))).shape == (4,)
    assert head(Tensor(np.ones((3, 8)))).shape == (3, 4)
    with pytest.raises(DimensionError):
        head(Tensor(np.ones(5)))


# ─── Checkpoints ────────────────────────────────────────────────────────────


def test_checkpoint_roundtrip(tmp_path, tiny_model):
    """Test that tensors, encoder config and info survive a save/load."""
    path = save_checkpoint(
        tmp_path / "run.ckpt", tiny_model.state_dict(), tiny_model.config, {"seed": 3}
    )
    ckpt = load_checkpoint(path)
    assert ckpt.encoder == tiny_model.config
    assert ckpt.info == {"seed": 3}
    for name, value in tiny_model.state_dict().items():
        assert np.array_equal(ckpt.tensors[name], value)


def test_checkpoint_bytes_deterministic(tmp_path, tiny_model):
    """Test that saving the same state twice gives identical files."""
    a = save_checkpoint(tmp_path / "a.ckpt", tiny_model.state_dict(), tiny_model.config)
    b = save_checkpoint(tmp_path / "b.ckpt", tiny_model.state_dict(), tiny_model.config)
    assert a.read_bytes() == b.read_bytes()


def test_checkpoint_missing_and_truncated(tmp_path, tiny_model):
    """Test that missing or truncated archives are file errors."""
    with pytest.raises(FileError):
        load_checkpoint(tmp_path / "absent.ckpt")
    path = save_checkpoint(tmp_path / "run.ckpt", tiny_model.state_dict(), tiny_model.config)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(FileError):
        read_archive(path)


def test_checkpoint_version_mismatch(tmp_path):
    """Test that an unknown format version is a compatibility error."""
    path = tmp_path / "old.ckpt"
    write_archive(path, {"x": np.zeros(2)}, {"format_version": 99})
    with pytest.raises(CompatibilityError):
        load_checkpoint(path)
