"""Linear classification head for the discriminative baseline."""
import numpy as np

from src.exceptions import DimensionError
from src.models.encoder import INIT_STD
from src.numerics import ops
from src.numerics.tensor import Tensor


class ClassifierHead:
    """logits = W·z + b with W (K×d) Gaussian (std 0.02) and b zero; both trainable."""

    def __init__(self, num_classes: int, embed_dim: int, seed: int = 0):
        rng = np.random.default_rng(seed)
        self.weight = Tensor(
            rng.normal(0.0, INIT_STD, (num_classes, embed_dim)), requires_grad=True,
            name="head.weight",
        )
        self.bias = Tensor(np.zeros(num_classes), requires_grad=True, name="head.bias")

    @property
    def num_classes(self) -> int:
        return self.weight.shape[0]

    def parameters(self) -> dict[str, Tensor]:
        return {self.weight.name: self.weight, self.bias.name: self.bias}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for name, tensor in self.parameters().items():
            tensor.data[...] = state[name]

    def __call__(self, z: Tensor) -> Tensor:
        """Logits (K,) for a representation (d,), or B×K for a B×d batch."""
        if z.shape[-1] != self.weight.shape[1]:
            raise DimensionError(
                f"Head expects representations of size {self.weight.shape[1]}, got {z.shape}"
            )
        if z.ndim == 1:
            rows = ops.reshape(z, (1, z.shape[0]))
            return ops.reshape(ops.add(ops.linear(rows, self.weight), self.bias),
                               (self.num_classes,))
        return ops.add(ops.linear(z, self.weight), self.bias)
