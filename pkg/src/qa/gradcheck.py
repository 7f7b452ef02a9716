"""Gradient QA engine: finite-difference checks of every differentiable building block."""
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from src.data.tokenizer import Vocabulary
from src.models.encoder import CausalSelfAttention, EncoderModel
from src.models.head import ClassifierHead
from src.models.lora import LoraLinear, lora_forward
from src.models.prototypes import compute_prototypes, init_prototype_set
from src.numerics import ops
from src.numerics.gradcheck import GradCheckResult, check_gradients
from src.numerics.tensor import Tensor
from src.schemas.encoder import EncoderConfig
from src.schemas.enums import PrototypeVariant
from src.training.losses import discriminative_loss, diversity_loss, joint_loss, match_loss

logger = logging.getLogger(__name__)

DEFAULT_INSTANCES = 20
# Randomly chosen coordinates per input tensor and instance
COORDS_PER_TENSOR = 6
# τ = 1 keeps the loss surface smooth enough for h = 1e-3 differences
CHECK_TAU = 1.0
CHECK_LAMBDA = 0.2

TINY_ENCODER = EncoderConfig(
    vocab_size=16,
    embed_dim=8,
    n_layers=2,
    n_heads=2,
    mlp_ratio=2,
    lora_rank=2,
    lora_alpha=2.0,
    max_seq_len=8,
)

CaseBuilder = Callable[[np.random.Generator], tuple[Callable[[], Tensor], dict[str, Tensor]]]


@dataclass
class CaseReport:
    """Outcome of one gradient case over all its instances."""

    name: str
    instances: int
    max_error: float = 0.0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _param(rng: np.random.Generator, *shape: int, name: str = "x") -> Tensor:
    return Tensor(rng.normal(size=shape), requires_grad=True, name=name)


def _weighted_sum(out: Tensor, weights: np.ndarray) -> Tensor:
    return ops.sum(ops.mul(out, Tensor._wrap(weights)))


def _randomize_adapters(layers: list[LoraLinear], rng: np.random.Generator) -> None:
    # B starts at zero, which would make every gradient w.r.t. A vanish
    for layer in layers:
        layer.lora_b.data[...] = rng.normal(0.0, 0.1, layer.lora_b.shape)


class GradientQAEngine:
    """
    Runs each gradient case on `instances` seeded random inputs.

    A case fails when any instance has a tensor whose analytic gradient deviates
    from central finite differences by more than max(1e-4·scale, 1e-6), where
    scale is the tensor's largest gradient magnitude. COORDS_PER_TENSOR seeded
    coordinates are differenced per tensor.
    """

    def __init__(self, instances: int = DEFAULT_INSTANCES, seed: int = 0):
        self.instances = instances
        self.seed = seed

    def cases(self) -> dict[str, CaseBuilder]:
        return {
            "matmul": self._case_matmul,
            "cosine": self._case_cosine,
            "pairwise_cosine": self._case_pairwise_cosine,
            "softmax_cross_entropy": self._case_cross_entropy,
            "lora_forward": self._case_lora_forward,
            "attention": self._case_attention,
            "encoder": self._case_encoder,
            "encode_embeddings": self._case_encode_embeddings,
            "prototypes": self._case_prototypes,
            "diversity_loss": self._case_diversity,
            "match_loss": self._case_match,
            "joint_loss": self._case_joint,
            "discriminative_loss": self._case_discriminative,
        }

    def evaluate(self, only: list[str] | None = None) -> tuple[bool, list[str]]:
        """
        Run all cases (or the named subset).

        Returns:
            Tuple of (passed, failure descriptions)
        """
        reports = self.run(only)
        failures = [f"{r.name}: {msg}" for r in reports for msg in r.failures]
        return not failures, failures

    def run(self, only: list[str] | None = None) -> list[CaseReport]:
        reports = []
        for index, (name, builder) in enumerate(self.cases().items()):
            if only and name not in only:
                continue
            report = CaseReport(name=name, instances=self.instances)
            for i in range(self.instances):
                rng = np.random.default_rng([self.seed, index, i])
                fn, inputs = builder(rng)
                results = check_gradients(fn, inputs, rng=rng, max_coords=COORDS_PER_TENSOR)
                report.max_error = max(report.max_error, *(r.max_abs_error for r in results))
                report.failures.extend(self._describe(i, r) for r in results if not r.passed)
            status = "ok" if report.passed else f"{len(report.failures)} failures"
            logger.info(f"gradcheck {name}: {status}, max error {report.max_error:.2e}")
            reports.append(report)
        return reports

    @staticmethod
    def _describe(instance: int, result: GradCheckResult) -> str:
        return (
            f"instance {instance}, tensor {result.name}: error {result.max_abs_error:.3e} "
            f"at scale {result.scale:.3e}"
        )

    # ─── Cases ──────────────────────────────────────────────────────────

    def _case_matmul(self, rng):
        a, b = _param(rng, 3, 4, name="a"), _param(rng, 4, 2, name="b")
        w = rng.normal(size=(3, 2))
        return lambda: _weighted_sum(ops.matmul(a, b), w), {"a": a, "b": b}

    def _case_cosine(self, rng):
        a, b = _param(rng, 5, name="a"), _param(rng, 5, name="b")
        return lambda: ops.cosine(a, b), {"a": a, "b": b}

    def _case_pairwise_cosine(self, rng):
        a, b = _param(rng, 3, 5, name="a"), _param(rng, 4, 5, name="b")
        w = rng.normal(size=(3, 4))
        return lambda: _weighted_sum(ops.pairwise_cosine(a, b), w), {"a": a, "b": b}

    def _case_cross_entropy(self, rng):
        logits = _param(rng, 3, 5, name="logits")
        targets = rng.integers(0, 5, size=3).tolist()
        return lambda: ops.softmax_cross_entropy(logits, targets), {"logits": logits}

    def _case_lora_forward(self, rng):
        layer = LoraLinear(rng.normal(size=(3, 5)), rank=2, alpha=2.0, rng=rng, name="lora")
        _randomize_adapters([layer], rng)
        x = _param(rng, 4, 5, name="x")
        w = rng.normal(size=(4, 3))
        inputs = {"x": x, "lora_a": layer.lora_a, "lora_b": layer.lora_b}
        return lambda: _weighted_sum(lora_forward(layer, x), w), inputs

    def _case_attention(self, rng):
        attn = CausalSelfAttention(TINY_ENCODER, "layers.0", rng, rng)
        _randomize_adapters(list(attn.projections.values()), rng)
        x = _param(rng, 4, TINY_ENCODER.embed_dim, name="x")
        w = rng.normal(size=(4, TINY_ENCODER.embed_dim))
        q, o = attn.projections["q"], attn.projections["o"]
        inputs = {"x": x, "q.lora_a": q.lora_a, "o.lora_b": o.lora_b}
        return lambda: _weighted_sum(attn(x), w), inputs

    def _tiny_model(self, rng) -> EncoderModel:
        config = TINY_ENCODER.model_copy(update={"backbone_seed": int(rng.integers(1 << 16))})
        model = EncoderModel(config, adapter_seed=int(rng.integers(1 << 16)))
        # Unit-scale embeddings: with std 0.02 rows a step of 1e-3 is no longer small
        model.embedding.data[...] = rng.normal(size=model.embedding.shape)
        _randomize_adapters(model.lora_layers(), rng)
        return model

    def _case_encoder(self, rng):
        model = self._tiny_model(rng)
        tokens = rng.integers(0, TINY_ENCODER.vocab_size, size=4).tolist()
        target = Tensor._wrap(rng.normal(size=TINY_ENCODER.embed_dim))
        first, last = model.lora_layers()[0], model.lora_layers()[-1]
        inputs = {
            first.lora_a.name: first.lora_a,
            first.lora_b.name: first.lora_b,
            last.lora_a.name: last.lora_a,
            last.lora_b.name: last.lora_b,
        }
        return lambda: ops.cosine(model.encode_tokens(tokens), target), inputs

    def _case_encode_embeddings(self, rng):
        model = self._tiny_model(rng)
        embeds = _param(rng, 3, TINY_ENCODER.embed_dim, name="embeds")
        target = Tensor._wrap(rng.normal(size=TINY_ENCODER.embed_dim))
        return lambda: ops.cosine(model.encode_embeddings(embeds), target), {"embeds": embeds}

    def _case_prototypes(self, rng):
        model = self._tiny_model(rng)
        vocab = Vocabulary(["alpha", "beta", "gamma", "check", "intent", "of"])
        protos = init_prototype_set(
            ["alpha", "beta gamma", "gamma"],
            PrototypeVariant.RANDOM_NAME,
            "check",
            2,
            model,
            vocab=vocab,
            seed=int(rng.integers(1 << 16)),
        )
        for block in protos.soft_tokens:
            block.data[...] = rng.normal(size=block.shape)
        w = rng.normal(size=(3, TINY_ENCODER.embed_dim))
        inputs = {name: t for name, t in protos.parameters().items() if name != "proto.soft.2"}
        return lambda: _weighted_sum(compute_prototypes(protos, model), w), inputs

    def _case_diversity(self, rng):
        protos = _param(rng, 4, 6, name="prototypes")
        return lambda: diversity_loss(protos), {"prototypes": protos}

    def _case_match(self, rng):
        z, protos = _param(rng, 6, name="z"), _param(rng, 4, 6, name="prototypes")
        target = int(rng.integers(0, 4))
        inputs = {"z": z, "prototypes": protos}
        return lambda: match_loss(z, protos, target, CHECK_TAU), inputs

    def _case_joint(self, rng):
        z, protos = _param(rng, 3, 6, name="z"), _param(rng, 4, 6, name="prototypes")
        targets = rng.integers(0, 4, size=3).tolist()

        def fn():
            match = match_loss(z, protos, targets, CHECK_TAU)
            return joint_loss(match, diversity_loss(protos), CHECK_LAMBDA)

        return fn, {"z": z, "prototypes": protos}

    def _case_discriminative(self, rng):
        head = ClassifierHead(4, 6, seed=int(rng.integers(1 << 16)))
        head.weight.data[...] = rng.normal(size=head.weight.shape)
        head.bias.data[...] = rng.normal(size=head.bias.shape)
        z = _param(rng, 6, name="z")
        target = int(rng.integers(0, 4))
        inputs = {"z": z, "head.weight": head.weight, "head.bias": head.bias}
        return lambda: discriminative_loss(z, head, target), inputs
