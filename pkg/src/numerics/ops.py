"""Differentiable operations over `Tensor`.

Every op computes its forward value with numpy and registers a backward rule
returning one gradient (or None) per input. Broadcasting is limited to what the
encoder needs: trailing-axis row/column broadcasts and scalars.
"""
import math
from typing import Sequence

import numpy as np
from scipy import special

from src.exceptions import (
    DegenerateVectorError,
    DimensionError,
    ShapeError,
    TargetIndexError,
)
from src.numerics.tensor import Tensor, as_tensor, make_result

NORM_FLOOR = 1e-12


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# ─── Elementwise arithmetic ─────────────────────────────────────────────────


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data
    return make_result(
        out, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape))
    )


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data
    return make_result(
        out, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape))
    )


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data
    return make_result(
        out,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data / b.data
    return make_result(
        out,
        (a, b),
        lambda g: (
            _unbroadcast(g / b.data, a.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        ),
    )


def square(a: Tensor) -> Tensor:
    return make_result(a.data * a.data, (a,), lambda g: (2.0 * a.data * g,))


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    return make_result(out, (a,), lambda g: (g * out,))


def log(a: Tensor) -> Tensor:
    return make_result(np.log(a.data), (a,), lambda g: (g / a.data,))


def sqrt(a: Tensor) -> Tensor:
    out = np.sqrt(a.data)
    return make_result(out, (a,), lambda g: (g / (2.0 * out),))


def silu(a: Tensor) -> Tensor:
    """x * sigmoid(x)."""
    sig = special.expit(a.data)
    out = a.data * sig
    return make_result(out, (a,), lambda g: (g * (sig + a.data * sig * (1.0 - sig)),))


# ─── Shape manipulation ─────────────────────────────────────────────────────


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    Matrix product of an m×k and a k×n tensor.

    Raises:
        DimensionError: If either operand is not 2-D or the inner dimensions differ
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"Cannot multiply shapes {a.shape} and {b.shape}")
    out = a.data @ b.data
    return make_result(out, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))


def transpose(a: Tensor) -> Tensor:
    if a.ndim != 2:
        raise ShapeError(f"transpose expects a 2-D tensor, got shape {a.shape}")
    return make_result(a.data.T.copy(), (a,), lambda g: (g.T,))


def linear(x: Tensor, weight: Tensor) -> Tensor:
    """Row-vector convention: x (…×d_in) times weightᵀ (d_out×d_in)."""
    return matmul(x, transpose(weight))


def reshape(a: Tensor, shape) -> Tensor:
    out = a.data.reshape(shape)
    return make_result(out.copy(), (a,), lambda g: (g.reshape(a.shape),))


def index(a: Tensor, idx) -> Tensor:
    """Basic or integer-array indexing; repeated indices accumulate on backward."""
    out = np.array(a.data[idx])

    def _backward(g):
        grad = np.zeros_like(a.data)
        np.add.at(grad, idx, g)
        return (grad,)

    return make_result(out, (a,), _backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return make_result(out, tensors, lambda g: tuple(np.split(g, bounds, axis=axis)))


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = np.stack([t.data for t in tensors], axis=axis)
    return make_result(
        out,
        tensors,
        lambda g: tuple(np.take(g, i, axis=axis) for i in range(len(tensors))),
    )


# ─── Reductions ─────────────────────────────────────────────────────────────


def sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001
    out = np.sum(a.data, axis=axis, keepdims=keepdims)

    def _backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.array(np.broadcast_to(g, a.shape)),)

    return make_result(out, (a,), _backward)


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    count = a.size if axis is None else a.shape[axis]
    return mul(sum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def logsumexp(a: Tensor, axis: int = -1) -> Tensor:
    """Max-shifted log-sum-exp along one axis."""
    out = special.logsumexp(a.data, axis=axis)
    weights = special.softmax(a.data, axis=axis)
    return make_result(out, (a,), lambda g: (np.expand_dims(g, axis) * weights,))


def softmax(a: Tensor, axis: int = -1, mask: np.ndarray | None = None) -> Tensor:
    """
    Softmax along `axis`; entries where `mask` is True are excluded (probability 0).
    """
    logits = a.data if mask is None else np.where(mask, -np.inf, a.data)
    out = special.softmax(logits, axis=axis)

    def _backward(g):
        inner = np.sum(g * out, axis=axis, keepdims=True)
        return (out * (g - inner),)

    return make_result(out, (a,), _backward)


def rms_norm(x: Tensor, weight: Tensor, eps: float = 1e-6) -> Tensor:
    """Root-mean-square normalization over the last axis, then elementwise gain."""
    scale = sqrt(add(mean(square(x), axis=-1, keepdims=True), eps))
    return mul(div(x, scale), weight)


# ─── Cosine geometry ────────────────────────────────────────────────────────


def _fdot(u: np.ndarray, v: np.ndarray) -> float:
    # Exactly rounded, so cos(x, x) is exactly 1.0 regardless of memory layout
    return math.fsum(np.multiply(u, v).tolist())


def _squared_norms(rows: np.ndarray) -> np.ndarray:
    sq = np.array([_fdot(r, r) for r in rows], dtype=np.float64)
    if rows.size and np.sqrt(sq).min() < NORM_FLOOR:
        bad = int(np.argmin(sq))
        raise DegenerateVectorError(f"Vector {bad} has norm below {NORM_FLOOR}")
    return sq


def cosine_values(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Pairwise cosine similarity matrix between the rows of `a` (m×d) and `b` (n×d).

    Plain numpy; shared by the differentiable ops, scoring, and classification so
    all three see bit-identical similarities.

    Raises:
        DimensionError: If the row dimensions differ
        DegenerateVectorError: If any row norm is below 1e-12
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise DimensionError(f"Cannot compare rows of shapes {a.shape} and {b.shape}")
    a_sq, b_sq = _squared_norms(a), _squared_norms(b)
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.float64)
    for i, row in enumerate(a):
        for j, col in enumerate(b):
            out[i, j] = _fdot(row, col) / math.sqrt(a_sq[i] * b_sq[j])
    return np.clip(out, -1.0, 1.0)


def cosine(a: Tensor, b: Tensor) -> Tensor:
    """
    Cosine similarity of two equal-length vectors, as a scalar tensor.

    Raises:
        DimensionError: If the vectors are not 1-D of equal length
        DegenerateVectorError: If either norm is below 1e-12 (no epsilon clamping)
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise DimensionError(f"cosine needs two equal-length vectors, got {a.shape} and {b.shape}")
    value = cosine_values(a.data[None, :], b.data[None, :])[0, 0]
    na, nb = np.linalg.norm(a.data), np.linalg.norm(b.data)

    def _backward(g):
        ga = g * (b.data / (na * nb) - value * a.data / (na * na))
        gb = g * (a.data / (na * nb) - value * b.data / (nb * nb))
        return (ga, gb)

    return make_result(np.asarray(value), (a, b), _backward)


def pairwise_cosine(a: Tensor, b: Tensor) -> Tensor:
    """
    Cosine similarity matrix (m×n) between the rows of `a` (m×d) and `b` (n×d).
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"pairwise_cosine expects 2-D inputs, got {a.shape} and {b.shape}")
    values = cosine_values(a.data, b.data)
    na = np.linalg.norm(a.data, axis=1)
    nb = np.linalg.norm(b.data, axis=1)
    a_hat = a.data / na[:, None]
    b_hat = b.data / nb[:, None]

    def _backward(g):
        weighted = g * values
        ga = (g @ b_hat - weighted.sum(axis=1)[:, None] * a_hat) / na[:, None]
        gb = (g.T @ a_hat - weighted.sum(axis=0)[:, None] * b_hat) / nb[:, None]
        return (ga, gb)

    return make_result(values, (a, b), _backward)


# ─── Classification objectives ──────────────────────────────────────────────


def softmax_cross_entropy(logits: Tensor, target) -> Tensor:
    """
    −log softmax(logits)[target], averaged over rows for a batch.

    `logits` is a K-vector with an integer target, or a B×K matrix with a
    sequence of B targets (mean reduction). Computed with a max-shifted
    log-sum-exp.

    Raises:
        TargetIndexError: If any target is outside [0, K)
        ShapeError: If logits are not 1-D or 2-D, or target count mismatches
    """
    logits = as_tensor(logits)
    single = logits.ndim == 1
    if logits.ndim not in (1, 2):
        raise ShapeError(f"logits must be 1-D or 2-D, got shape {logits.shape}")
    matrix = logits.data[None, :] if single else logits.data
    targets = np.atleast_1d(np.asarray(target, dtype=np.int64))
    if targets.shape[0] != matrix.shape[0]:
        raise ShapeError(f"{targets.shape[0]} targets for {matrix.shape[0]} logit rows")
    n_classes = matrix.shape[1]
    if targets.min() < 0 or targets.max() >= n_classes:
        raise TargetIndexError(f"Target out of range [0, {n_classes}): {targets.tolist()}")

    rows = np.arange(matrix.shape[0])
    losses = special.logsumexp(matrix, axis=1) - matrix[rows, targets]
    out = losses.mean()
    probs = special.softmax(matrix, axis=1)

    def _backward(g):
        grad = probs.copy()
        grad[rows, targets] -= 1.0
        grad *= g / matrix.shape[0]
        return (grad[0] if single else grad,)

    return make_result(np.asarray(out), (logits,), _backward)
