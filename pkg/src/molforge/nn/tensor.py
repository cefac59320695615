"""Reverse-mode automatic differentiation over float64 numpy arrays.

Operations execute eagerly; while a Tape is active they also append a
node holding the parents and a pullback closure. Eager execution means
tape order is already topological, so the backward pass is one reversed
sweep that visits each node exactly once. Every op output and every
gradient is checked finite; a NaN or Inf raises immediately with the
name of the op that produced it, which turns silent divergence into a
stack trace.
"""

from __future__ import annotations

import numpy as np


class TensorError(RuntimeError):
    pass


class Tape:
    """Single-owner recording context; not shareable across threads."""

    _active: "Tape | None" = None

    def __init__(self):
        self.nodes: list[Tensor] = []

    def __enter__(self) -> "Tape":
        if Tape._active is not None:
            raise TensorError("a tape is already active")
        Tape._active = self
        return self

    def __exit__(self, *exc):
        Tape._active = None
        return False


def _check_finite(values: np.ndarray, op: str) -> None:
    if not np.all(np.isfinite(values)):
        raise TensorError(f"non-finite values produced by op '{op}'")


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "tracked", "_op", "_parents", "_pullback")

    def __init__(self, data, requires_grad: bool = False, _op: str = "leaf"):
        self.data = np.asarray(data, dtype=np.float64)
        _check_finite(self.data, _op)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.tracked = requires_grad
        self._op = _op
        self._parents: tuple[Tensor, ...] = ()
        self._pullback = None

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, op={self._op})"

    # operator sugar; scalars and arrays are wrapped as constants
    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __radd__(self, other):
        return add(_as_tensor(other), self)

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, _as_tensor(other))

    def __rmul__(self, other):
        return mul(_as_tensor(other), self)

    def __truediv__(self, other):
        return div(self, _as_tensor(other))

    def __neg__(self):
        return mul(self, _as_tensor(-1.0))

    def __pow__(self, exponent):
        return power(self, exponent)

    def item(self) -> float:
        return float(self.data)


def _as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _record(out: Tensor, parents: tuple[Tensor, ...], pullback) -> Tensor:
    tape = Tape._active
    if tape is not None and any(p.tracked for p in parents):
        out.tracked = True
        out._parents = parents
        out._pullback = pullback
        tape.nodes.append(out)
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


# -- primitive ops ----------------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data + b.data, _op="add")
    return _record(out, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data - b.data, _op="sub")
    return _record(out, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data * b.data, _op="mul")
    return _record(
        out,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def div(a: Tensor, b: Tensor) -> Tensor:
    with np.errstate(all="ignore"):
        out = Tensor(a.data / b.data, _op="div")

    def pullback(g):
        ga = _unbroadcast(g / b.data, a.shape)
        gb = _unbroadcast(-g * a.data / (b.data**2), b.shape)
        return ga, gb

    return _record(out, (a, b), pullback)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data @ b.data, _op="matmul")
    return _record(out, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))


def power(a: Tensor, exponent: float) -> Tensor:
    with np.errstate(all="ignore"):
        out = Tensor(a.data**exponent, _op="power")

    def pullback(g):
        with np.errstate(all="ignore"):
            return (g * exponent * a.data ** (exponent - 1),)

    return _record(out, (a,), pullback)


def exp(a: Tensor) -> Tensor:
    with np.errstate(over="ignore"):
        value = np.exp(a.data)
    out = Tensor(value, _op="exp")
    return _record(out, (a,), lambda g: (g * value,))


def log(a: Tensor) -> Tensor:
    with np.errstate(all="ignore"):
        out = Tensor(np.log(a.data), _op="log")
    return _record(out, (a,), lambda g: (g / a.data,))


def tensor_sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = Tensor(a.data.sum(axis=axis, keepdims=keepdims), _op="sum")

    def pullback(g):
        if axis is None:
            return (np.broadcast_to(g, a.shape).copy(),)
        gg = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(gg, a.shape).copy(),)

    return _record(out, (a,), pullback)


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    count = a.data.size if axis is None else a.shape[axis]
    return tensor_sum(a, axis=axis, keepdims=keepdims) * (1.0 / count)


def softplus(a: Tensor) -> Tensor:
    out = Tensor(np.logaddexp(0.0, a.data), _op="softplus")
    # sigmoid via tanh keeps large negative inputs from overflowing
    return _record(out, (a,), lambda g: (g * 0.5 * (1.0 + np.tanh(a.data / 2.0)),))


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    value = shifted - log_z
    out = Tensor(value, _op="log_softmax")

    def pullback(g):
        return (g - np.exp(value) * g.sum(axis=axis, keepdims=True),)

    return _record(out, (a,), pullback)


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    return exp(log_softmax(a, axis=axis))


def gather_rows(a: Tensor, indices: np.ndarray) -> Tensor:
    indices = np.asarray(indices, dtype=np.int64)
    out = Tensor(a.data[indices], _op="gather_rows")

    def pullback(g):
        ga = np.zeros_like(a.data)
        np.add.at(ga, indices, g)
        return (ga,)

    return _record(out, (a,), pullback)


def segment_sum(a: Tensor, segment_ids: np.ndarray, n_segments: int) -> Tensor:
    segment_ids = np.asarray(segment_ids, dtype=np.int64)
    value = np.zeros((n_segments,) + a.shape[1:], dtype=np.float64)
    np.add.at(value, segment_ids, a.data)
    out = Tensor(value, _op="segment_sum")
    return _record(out, (a,), lambda g: (g[segment_ids],))


def concat(tensors: list[Tensor], axis: int = 0) -> Tensor:
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis), _op="concat")
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def pullback(g):
        return tuple(np.split(g, splits, axis=axis))

    return _record(out, tuple(tensors), pullback)


def reshape(a: Tensor, shape) -> Tensor:
    out = Tensor(a.data.reshape(shape), _op="reshape")
    return _record(out, (a,), lambda g: (g.reshape(a.shape),))


# -- backward ----------------------------------------------------------------


def backward(loss: Tensor) -> None:
    """Populate .grad on every reached parameter, then clear the tape."""
    tape = Tape._active
    if tape is None:
        raise TensorError("backward requires an active tape")
    if loss.data.size != 1:
        raise TensorError(f"backward needs a scalar loss, got shape {loss.shape}")

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    try:
        for node in reversed(tape.nodes):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._pullback is None:
                continue
            parent_grads = node._pullback(g)
            for parent, pg in zip(node._parents, parent_grads):
                if not parent.tracked:
                    continue
                if not np.all(np.isfinite(pg)):
                    raise TensorError(f"non-finite gradient from op '{node._op}'")
                if parent.requires_grad:
                    if parent.grad is None:
                        parent.grad = np.zeros_like(parent.data)
                    parent.grad += pg
                else:
                    key = id(parent)
                    if key in grads:
                        grads[key] += pg
                    else:
                        grads[key] = np.array(pg, dtype=np.float64)
    finally:
        tape.nodes.clear()
