"""Low-rank adapted linear projection."""
import numpy as np

from src.exceptions import DimensionError
from src.numerics import ops
from src.numerics.tensor import Tensor


class LoraLinear:
    """
    Frozen projection W (d_out×d_in) plus a trainable low-rank update B·A.

    A is r×d_in, Gaussian (std 0.02); B is d_out×r and zero, so the update is
    exactly zero at initialization. Only A and B ever receive optimizer updates.
    """

    def __init__(
        self,
        weight: np.ndarray,
        rank: int,
        alpha: float,
        rng: np.random.Generator,
        name: str = "lora",
    ):
        d_out, d_in = weight.shape
        self.name = name
        self.weight = Tensor(weight, name=f"{name}.weight")
        self.lora_a = Tensor(rng.normal(0.0, 0.02, (rank, d_in)), requires_grad=True,
                             name=f"{name}.lora_a")
        self.lora_b = Tensor(np.zeros((d_out, rank)), requires_grad=True, name=f"{name}.lora_b")
        self.rank = rank
        self.alpha = alpha
        self.enabled = True

    @property
    def scale(self) -> float:
        return self.alpha / self.rank

    @property
    def in_features(self) -> int:
        return self.weight.shape[1]

    @property
    def out_features(self) -> int:
        return self.weight.shape[0]

    def trainable_parameters(self) -> dict[str, Tensor]:
        return {self.lora_a.name: self.lora_a, self.lora_b.name: self.lora_b}

    def frozen_parameters(self) -> dict[str, Tensor]:
        return {self.weight.name: self.weight}

    def __call__(self, x: Tensor) -> Tensor:
        return lora_forward(self, x)


def lora_forward(layer: LoraLinear, x: Tensor) -> Tensor:
    """
    W·x + (α/r)·B·(A·x) in row-vector form, for x of shape (d_in,) or (L×d_in).

    With the adapter disabled only the frozen path W·x is computed.

    Raises:
        DimensionError: If the trailing dimension of x is not d_in
    """
    if x.shape[-1] != layer.in_features:
        raise DimensionError(
            f"{layer.name}: input shape {x.shape} does not end in d_in={layer.in_features}"
        )
    vector = x.ndim == 1
    rows = ops.reshape(x, (1, x.shape[0])) if vector else x
    out = ops.linear(rows, layer.weight)
    if layer.enabled:
        delta = ops.linear(ops.linear(rows, layer.lora_a), layer.lora_b)
        out = ops.add(out, ops.mul(delta, layer.scale))
    return ops.reshape(out, (layer.out_features,)) if vector else out
