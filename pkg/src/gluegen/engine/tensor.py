"""Reverse-mode automatic differentiation over dense float64 tensors.

Forward calls run with or without an active Tape; under a Tape every
primitive application is recorded in topological order and
``Tape.backward`` accumulates gradients into requires_grad leaves.
"""

from __future__ import annotations

import numpy as np


class Tensor:
    __slots__ = ("values", "requires_grad", "grad")

    def __init__(self, values, requires_grad: bool = False):
        self.values = np.asarray(values, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(self.values) if requires_grad else None

    @property
    def shape(self):
        return self.values.shape

    def zero_grad(self):
        if self.requires_grad:
            self.grad = np.zeros_like(self.values)

    def item(self) -> float:
        return float(self.values)

    def __repr__(self):
        return f"Tensor(shape={self.values.shape}, requires_grad={self.requires_grad})"


class _Record:
    __slots__ = ("inputs", "output", "backward_fn")

    def __init__(self, inputs, output, backward_fn):
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn


_TAPE_STACK: list["Tape"] = []


class Tape:
    """Ordered record of primitive applications; context-managed."""

    def __init__(self):
        self.records: list[_Record] = []

    def __enter__(self) -> "Tape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, *exc):
        popped = _TAPE_STACK.pop()
        assert popped is self
        return False

    def backward(self, loss: Tensor) -> None:
        """Reverse-topological gradient accumulation from a scalar loss."""
        if loss.values.shape != ():
            raise ValueError(f"loss must be scalar, got shape {loss.values.shape}")
        adjoint: dict[int, np.ndarray] = {id(loss): np.asarray(1.0)}
        for rec in reversed(self.records):
            out_grad = adjoint.pop(id(rec.output), None)
            if out_grad is None:
                continue
            grads = rec.backward_fn(out_grad)
            for t, g in zip(rec.inputs, grads):
                if g is None:
                    continue
                key = id(t)
                if key in adjoint:
                    adjoint[key] = adjoint[key] + g
                else:
                    adjoint[key] = g
        # leaves are never record outputs, so their totals remain in the map
        for rec in self.records:
            for t in rec.inputs:
                if t.requires_grad and id(t) in adjoint:
                    t.grad = t.grad + adjoint.pop(id(t))


def _active_tape() -> Tape | None:
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def _emit(inputs, values, backward_fn) -> Tensor:
    out = Tensor(values)
    tape = _active_tape()
    if tape is not None:
        tape.records.append(_Record(tuple(inputs), out, backward_fn))
    return out


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    """Reduce a broadcast gradient back to the operand's shape."""
    g = np.asarray(g)
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def constant(values) -> Tensor:
    return Tensor(values)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    av, bv = a.values, b.values
    if av.ndim != 2 or bv.ndim != 2 or av.shape[1] != bv.shape[0]:
        raise ValueError(f"matmul shape mismatch: {av.shape} @ {bv.shape}")
    values = av @ bv

    def backward(g):
        return g @ bv.T, av.T @ g

    return _emit((a, b), values, backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    values = a.values + b.values

    def backward(g):
        return _unbroadcast(g, a.values.shape), _unbroadcast(g, b.values.shape)

    return _emit((a, b), values, backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    values = a.values - b.values

    def backward(g):
        return _unbroadcast(g, a.values.shape), -_unbroadcast(g, b.values.shape)

    return _emit((a, b), values, backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    values = a.values * b.values

    def backward(g):
        return (
            _unbroadcast(g * b.values, a.values.shape),
            _unbroadcast(g * a.values, b.values.shape),
        )

    return _emit((a, b), values, backward)


def scale(a: Tensor, c: float) -> Tensor:
    values = a.values * c

    def backward(g):
        return (g * c,)

    return _emit((a,), values, backward)


def concat(*args, axis: int = -1) -> Tensor:
    """concat([a, b, ...], axis) or concat(a, b, ..., axis=...)."""
    if len(args) == 1 and isinstance(args[0], (list, tuple)):
        tensors = list(args[0])
    else:
        tensors = list(args)
    values = np.concatenate([t.values for t in tensors], axis=axis)
    sizes = [t.values.shape[axis] for t in tensors]

    def backward(g):
        return tuple(np.split(g, np.cumsum(sizes)[:-1], axis=axis))

    return _emit(tensors, values, backward)


def slice_(a: Tensor, start: int, stop: int, axis: int = -1) -> Tensor:
    index = [slice(None)] * a.values.ndim
    index[axis] = slice(start, stop)
    index = tuple(index)
    values = a.values[index]

    def backward(g):
        full = np.zeros_like(a.values)
        full[index] = g
        return (full,)

    return _emit((a,), values, backward)


def relu(a: Tensor) -> Tensor:
    mask = a.values > 0
    values = a.values * mask

    def backward(g):
        return (g * mask,)

    return _emit((a,), values, backward)


def sigmoid(a: Tensor) -> Tensor:
    x = a.values
    values = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))

    def backward(g):
        return (g * values * (1.0 - values),)

    return _emit((a,), values, backward)


def tanh(a: Tensor) -> Tensor:
    values = np.tanh(a.values)

    def backward(g):
        return (g * (1.0 - values * values),)

    return _emit((a,), values, backward)


def exp(a: Tensor) -> Tensor:
    values = np.exp(a.values)

    def backward(g):
        return (g * values,)

    return _emit((a,), values, backward)


def mean(a: Tensor) -> Tensor:
    values = a.values.mean()
    size = a.values.size

    def backward(g):
        return (np.full_like(a.values, g / size),)

    return _emit((a,), np.asarray(values), backward)


def sum_(a: Tensor) -> Tensor:
    values = a.values.sum()

    def backward(g):
        return (np.full_like(a.values, g),)

    return _emit((a,), np.asarray(values), backward)


def softmax(a: Tensor) -> Tensor:
    x = a.values
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    values = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        dot = (g * values).sum(axis=-1, keepdims=True)
        return ((g - dot) * values,)

    return _emit((a,), values, backward)


def softmax_cross_entropy(logits: Tensor, target) -> Tensor:
    """Sum over rows of cross-entropy between softmax(logits) and integer targets."""
    x = logits.values
    squeeze = x.ndim == 1
    x2 = x[None, :] if squeeze else x
    targets = np.atleast_1d(np.asarray(target, dtype=np.intp))
    if targets.shape[0] != x2.shape[0]:
        raise ValueError(f"target count {targets.shape[0]} != rows {x2.shape[0]}")
    shifted = x2 - x2.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1)) + x2.max(axis=-1)
    picked = x2[np.arange(x2.shape[0]), targets]
    values = np.asarray((lse - picked).sum())

    def backward(g):
        p = np.exp(shifted)
        p /= p.sum(axis=-1, keepdims=True)
        p[np.arange(x2.shape[0]), targets] -= 1.0
        grad = p * g
        return (grad[0] if squeeze else grad,)

    return _emit((logits,), values, backward)


def binary_cross_entropy(logits: Tensor, target) -> Tensor:
    """Sum of binary cross-entropy with logits against 0/1 targets."""
    x = logits.values
    t = np.asarray(target, dtype=np.float64)
    if t.shape != x.shape:
        raise ValueError(f"target shape {t.shape} != logits shape {x.shape}")
    values = np.asarray((np.maximum(x, 0.0) - x * t + np.log1p(np.exp(-np.abs(x)))).sum())

    def backward(g):
        s = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
        return ((s - t) * g,)

    return _emit((logits,), values, backward)


def transpose(a: Tensor) -> Tensor:
    values = a.values.T

    def backward(g):
        return (g.T,)

    return _emit((a,), values, backward)


def gather_rows(a: Tensor, indices) -> Tensor:
    idx = np.asarray(indices, dtype=np.intp)
    values = a.values[idx]

    def backward(g):
        full = np.zeros_like(a.values)
        np.add.at(full, idx, g)
        return (full,)

    return _emit((a,), values, backward)


_PRIMITIVES = {
    "matmul": matmul,
    "add": add,
    "sub": sub,
    "mul": mul,
    "scale": scale,
    "concat": concat,
    "slice": slice_,
    "relu": relu,
    "sigmoid": sigmoid,
    "tanh": tanh,
    "transpose": transpose,
    "exp": exp,
    "mean": mean,
    "sum": sum_,
    "softmax": softmax,
    "softmax_cross_entropy": softmax_cross_entropy,
    "binary_cross_entropy": binary_cross_entropy,
    "gather_rows": gather_rows,
}


def apply_primitive(kind: str, *inputs, **kwargs) -> Tensor:
    try:
        fn = _PRIMITIVES[kind]
    except KeyError:
        raise ValueError(f"unknown primitive kind {kind!r}") from None
    return fn(*inputs, **kwargs)


def primitive_kinds() -> list[str]:
    return sorted(_PRIMITIVES)


def backward(tape: Tape, loss: Tensor) -> None:
    tape.backward(loss)
