"""Tests for the gradient QA engine."""
from unittest.mock import patch

import pytest

from src.numerics import ops
from src.numerics.gradcheck import GradCheckResult, check_gradients, numeric_gradient
from src.numerics.tensor import Tensor
from src.qa.gradcheck import COORDS_PER_TENSOR, GradientQAEngine


def test_engine_covers_every_building_block():
    """Test that each differentiable component has a case."""
    names = set(GradientQAEngine().cases())
    assert {
        "cosine",
        "softmax_cross_entropy",
        "lora_forward",
        "attention",
        "encoder",
        "prototypes",
        "diversity_loss",
        "match_loss",
        "joint_loss",
        "discriminative_loss",
    } <= names


def test_engine_passes_on_few_instances():
    """Test that every case agrees with finite differences."""
    passed, failures = GradientQAEngine(instances=2, seed=3).evaluate()
    assert passed, failures


def test_engine_runs_selected_cases():
    """Test that `only` restricts the run and reports per case."""
    reports = GradientQAEngine(instances=2).run(["cosine", "match_loss"])
    assert [r.name for r in reports] == ["cosine", "match_loss"]
    assert all(r.passed and r.instances == 2 for r in reports)
    assert all(r.max_error < 1e-4 for r in reports)


def test_engine_reproducible():
    """Test that a seed fixes the checked inputs."""
    first = GradientQAEngine(instances=2, seed=5).run(["encoder"])[0]
    second = GradientQAEngine(instances=2, seed=5).run(["encoder"])[0]
    assert first.max_error == second.max_error


def test_failure_threshold():
    """Test the max(1e-4·scale, 1e-6) acceptance rule."""
    assert GradCheckResult("x", max_abs_error=5e-7, scale=0.0).passed
    assert GradCheckResult("x", max_abs_error=5e-4, scale=10.0).passed
    assert not GradCheckResult("x", max_abs_error=2e-3, scale=10.0).passed
    result = GradCheckResult("x", max_abs_error=5e-4, scale=10.0)
    assert result.relative_error == pytest.approx(5e-5)


def test_check_gradients_covers_every_coordinate(rng):
    """Test that without max_coords every coordinate is differenced and agrees."""
    a = Tensor(rng.normal(size=(3, 4)), requires_grad=True, name="a")
    with patch("src.numerics.gradcheck.numeric_gradient", wraps=numeric_gradient) as spy:
        results = check_gradients(lambda: ops.sum(ops.mul(a, a)), {"a": a})
    assert len(spy.call_args.args[2]) == 12
    assert results[0].passed
    assert results[0].relative_error < 1e-4


def test_engine_samples_a_fixed_number_of_coordinates():
    """Test that the engine differences COORDS_PER_TENSOR coordinates of larger tensors."""
    with patch("src.qa.gradcheck.check_gradients", wraps=check_gradients) as spy:
        GradientQAEngine(instances=1).run(["matmul"])
    assert spy.call_args.kwargs["max_coords"] == COORDS_PER_TENSOR
