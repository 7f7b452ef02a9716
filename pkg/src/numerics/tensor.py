"""Dense float64 tensors with reverse-mode differentiation over a single-use tape."""
import threading
from typing import Callable, Iterable, Sequence

import numpy as np

from src.exceptions import NumericError, ShapeError, UsageError

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_local = threading.local()


def _tape_stack() -> list["Tape"]:
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def active_tape() -> "Tape | None":
    """Innermost tape entered on this thread, if any."""
    stack = _tape_stack()
    return stack[-1] if stack else None


class _Node:
    __slots__ = ("parents", "output", "backward")

    def __init__(self, parents: tuple["Tensor", ...], output: "Tensor", backward: BackwardFn):
        self.parents = parents
        self.output = output
        self.backward = backward


class Tape:
    """
    Ordered record of the operations of one forward pass.

    Operations are recorded only while the tape is entered as a context manager
    and only when at least one input requires a gradient. Nodes are appended in
    creation order, so every node's inputs precede it. A tape is consumed by
    `backward` and cannot be replayed.
    """

    def __init__(self):
        self._nodes: list[_Node] = []
        self._consumed = False

    def __enter__(self) -> "Tape":
        if self._consumed:
            raise UsageError("Cannot record on a consumed tape")
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def __len__(self) -> int:
        return len(self._nodes)

    @property
    def consumed(self) -> bool:
        return self._consumed

    def record(self, node: _Node) -> None:
        if self._consumed:
            raise UsageError("Cannot record on a consumed tape")
        self._nodes.append(node)


class Tensor:
    """
    Row-major float64 array with an optional gradient buffer.

    `grad` exists iff `requires_grad`; it has the shape of `data`. Tensors are
    treated as immutable apart from their gradient buffers and the in-place
    parameter updates the optimizer performs.
    """

    __slots__ = ("data", "requires_grad", "grad", "name", "_tape")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        array = np.array(data, dtype=np.float64)
        if any(dim <= 0 for dim in array.shape):
            raise ShapeError(f"Tensor dimensions must be positive, got shape {array.shape}")
        self._init(array, requires_grad, name)

    def _init(self, array: np.ndarray, requires_grad: bool, name: str | None) -> None:
        self.data = array
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(array) if requires_grad else None
        self.name = name
        self._tape: Tape | None = None

    @classmethod
    def _wrap(cls, array: np.ndarray, requires_grad: bool = False) -> "Tensor":
        """Wrap an op result without copying it."""
        out = cls.__new__(cls)
        out._init(np.asarray(array, dtype=np.float64), requires_grad, None)
        return out

    # ─── Introspection ──────────────────────────────────────────────────

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def detach(self) -> "Tensor":
        return Tensor._wrap(self.data)

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad.fill(0.0)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    # ─── Operator sugar (implemented in ops) ────────────────────────────

    def __add__(self, other):
        from src.numerics import ops

        return ops.add(self, other)

    def __radd__(self, other):
        from src.numerics import ops

        return ops.add(other, self)

    def __sub__(self, other):
        from src.numerics import ops

        return ops.sub(self, other)

    def __rsub__(self, other):
        from src.numerics import ops

        return ops.sub(other, self)

    def __mul__(self, other):
        from src.numerics import ops

        return ops.mul(self, other)

    def __rmul__(self, other):
        from src.numerics import ops

        return ops.mul(other, self)

    def __truediv__(self, other):
        from src.numerics import ops

        return ops.div(self, other)

    def __neg__(self):
        from src.numerics import ops

        return ops.mul(self, -1.0)

    def __matmul__(self, other):
        from src.numerics import ops

        return ops.matmul(self, other)

    def __getitem__(self, index):
        from src.numerics import ops

        return ops.index(self, index)

    @property
    def T(self) -> "Tensor":  # noqa: N802
        from src.numerics import ops

        return ops.transpose(self)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        from src.numerics import ops

        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        from src.numerics import ops

        return ops.mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape) -> "Tensor":
        from src.numerics import ops

        return ops.reshape(self, shape[0] if len(shape) == 1 else shape)


def as_tensor(value) -> Tensor:
    """Return `value` unchanged if it is a Tensor, else a constant Tensor."""
    if isinstance(value, Tensor):
        return value
    return Tensor._wrap(np.asarray(value, dtype=np.float64))


def make_result(array: np.ndarray, parents: Iterable[Tensor], backward: BackwardFn) -> Tensor:
    """
    Wrap an op result and record it on the active tape.

    The result participates in differentiation only when a tape is active and at
    least one parent requires a gradient; otherwise it is a constant.
    """
    parents = tuple(parents)
    tape = active_tape()
    tracked = tape is not None and any(p.requires_grad for p in parents)
    out = Tensor._wrap(array, requires_grad=tracked)
    if tracked:
        tape.record(_Node(parents, out, backward))
        out._tape = tape
    return out


def backward(loss: Tensor) -> None:
    """
    Populate gradients of every requires_grad ancestor of a scalar loss.

    Nodes are visited exactly once, in reverse recording order. Leaf gradients
    accumulate into existing buffers; the tape is consumed afterwards.

    Raises:
        ShapeError: If `loss` is not a scalar
        UsageError: If `loss` is not on a live tape
        NumericError: If a leaf gradient is not finite
    """
    if loss.data.ndim != 0:
        raise ShapeError(f"backward() needs a scalar loss, got shape {loss.shape}")
    tape = loss._tape
    if tape is None:
        raise UsageError("Loss was not recorded on a tape; build it inside `with Tape():`")
    if tape.consumed:
        raise UsageError("Tape already consumed by a previous backward()")

    pending: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    owners: dict[int, Tensor] = {id(loss): loss}

    for node in reversed(tape._nodes):
        key = id(node.output)
        upstream = pending.pop(key, None)
        owners.pop(key, None)
        if upstream is None:
            continue
        node.output.grad += upstream
        for parent, grad in zip(node.parents, node.backward(upstream)):
            if grad is None or not parent.requires_grad:
                continue
            pkey = id(parent)
            if pkey in pending:
                pending[pkey] = pending[pkey] + grad
            else:
                pending[pkey] = grad
                owners[pkey] = parent

    # Whatever is left belongs to leaves (parameters and injected inputs)
    for key, grad in pending.items():
        leaf = owners[key]
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"Non-finite gradient for {leaf!r}")
        leaf.grad += grad

    tape._nodes.clear()
    tape._consumed = True
