"""Central finite-difference gradient checking."""
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from src.numerics.tensor import Tape, Tensor, backward

STEP = 1e-3
REL_TOL = 1e-4
ABS_TOL = 1e-6


@dataclass(frozen=True)
class GradCheckResult:
    """
    Agreement between analytic and numeric gradients for one input tensor.

    The error is relative to the tensor as a whole: the largest coordinate
    deviation over the largest gradient magnitude (`scale`) of either kind.
    Below a scale of ABS_TOL / REL_TOL the absolute bound ABS_TOL applies.
    """

    name: str
    max_abs_error: float
    scale: float

    @property
    def relative_error(self) -> float:
        return self.max_abs_error / self.scale if self.scale > 0.0 else 0.0

    @property
    def passed(self) -> bool:
        return self.max_abs_error <= max(REL_TOL * self.scale, ABS_TOL)


def numeric_gradient(
    fn: Callable[[], Tensor],
    tensor: Tensor,
    coords: Sequence[tuple[int, ...]],
    step: float = STEP,
) -> np.ndarray:
    """Central differences of a scalar-valued `fn` at the given coordinates of `tensor`."""
    out = np.empty(len(coords), dtype=np.float64)
    for i, coord in enumerate(coords):
        original = tensor.data[coord]
        tensor.data[coord] = original + step
        plus = fn().item()
        tensor.data[coord] = original - step
        minus = fn().item()
        tensor.data[coord] = original
        out[i] = (plus - minus) / (2.0 * step)
    return out


def check_gradients(
    fn: Callable[[], Tensor],
    inputs: dict[str, Tensor],
    rng: np.random.Generator | None = None,
    max_coords: int | None = None,
    step: float = STEP,
) -> list[GradCheckResult]:
    """
    Compare `backward` gradients of `fn()` against central finite differences.

    Args:
        fn: Builds a scalar loss from the current values of `inputs`
        inputs: Named tensors with requires_grad=True
        rng: Picks a coordinate subset when `max_coords` is set
        max_coords: Coordinates checked per tensor (all when None)
        step: Finite-difference step h

    Returns:
        One result per input tensor
    """
    for tensor in inputs.values():
        tensor.zero_grad()
    with Tape():
        loss = fn()
    backward(loss)
    analytic = {name: t.grad.copy() for name, t in inputs.items()}

    results = []
    for name, tensor in inputs.items():
        coords = list(np.ndindex(tensor.shape))
        if max_coords is not None and len(coords) > max_coords:
            rng = rng or np.random.default_rng(0)
            picks = rng.choice(len(coords), size=max_coords, replace=False)
            coords = [coords[i] for i in sorted(picks)]
        numeric = numeric_gradient(fn, tensor, coords, step)
        exact = np.array([analytic[name][c] for c in coords])
        scale = float(max(np.abs(exact).max(initial=0.0), np.abs(numeric).max(initial=0.0)))
        results.append(GradCheckResult(name, float(np.abs(exact - numeric).max()), scale))
    return results
