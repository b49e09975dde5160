"""Reverse-mode computation tape for scalars, vectors, and matrices.

Nodes are integer indices into an append-only value list. Every
operation's inputs have smaller indices than its output, so `backward`
is a single sweep in strictly decreasing index order.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.special import expit
from scipy.special import softmax as _softmax


class ShapeError(ValueError):
    """Operand shapes do not conform for a tape operation."""


def _as_value(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim > 2:
        raise ShapeError(f"tape supports scalars, vectors and matrices, got shape {a.shape}")
    return a


def _elementwise_ok(a: np.ndarray, b: np.ndarray) -> bool:
    # same shape, either side scalar, or row-vector broadcast over a matrix
    if a.shape == b.shape or a.ndim == 0 or b.ndim == 0:
        return True
    if a.ndim == 2 and b.ndim == 1 and a.shape[1] == b.shape[0]:
        return True
    if b.ndim == 2 and a.ndim == 1 and b.shape[1] == a.shape[0]:
        return True
    return False


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a broadcast gradient back to the operand's shape."""
    if g.shape == shape:
        return g
    if shape == ():
        return np.asarray(g.sum())
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, s in enumerate(shape):
        if s == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def _acc(grads: list, i: int, g: np.ndarray) -> None:
    if grads[i] is None:
        grads[i] = g
    else:
        grads[i] = grads[i] + g


class Tape:
    """Append-only record of differentiable array operations."""

    def __init__(self) -> None:
        self.values: list[np.ndarray] = []
        self._backs: list[Callable | None] = []
        self._param_nodes: list[tuple[int, object]] = []
        self._param_cache: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.values)

    def _push(self, value: np.ndarray, back: Callable | None = None) -> int:
        self.values.append(value)
        self._backs.append(back)
        return len(self.values) - 1

    # -- leaves ----------------------------------------------------------

    def leaf(self, value) -> int:
        """Record a constant (non-differentiable) input."""
        return self._push(_as_value(value))

    def param(self, p) -> int:
        """Record a leaf bound to a trainable parameter.

        Registering the same parameter object twice returns the same
        node, so weight-tied models accumulate gradients naturally.
        """
        idx = self._param_cache.get(id(p))
        if idx is None:
            idx = self._push(_as_value(p.value))
            self._param_cache[id(p)] = idx
            self._param_nodes.append((idx, p))
        return idx

    # -- arithmetic ------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        va, vb = self.values[a], self.values[b]
        if not _elementwise_ok(va, vb):
            raise ShapeError(f"add: shapes {va.shape} and {vb.shape} do not conform")
        out = va + vb

        def back(g, grads):
            _acc(grads, a, _unbroadcast(g, va.shape))
            _acc(grads, b, _unbroadcast(g, vb.shape))

        return self._push(out, back)

    def sub(self, a: int, b: int) -> int:
        va, vb = self.values[a], self.values[b]
        if not _elementwise_ok(va, vb):
            raise ShapeError(f"sub: shapes {va.shape} and {vb.shape} do not conform")
        out = va - vb

        def back(g, grads):
            _acc(grads, a, _unbroadcast(g, va.shape))
            _acc(grads, b, _unbroadcast(-g, vb.shape))

        return self._push(out, back)

    def mul(self, a: int, b: int) -> int:
        va, vb = self.values[a], self.values[b]
        if not _elementwise_ok(va, vb):
            raise ShapeError(f"mul: shapes {va.shape} and {vb.shape} do not conform")
        out = va * vb

        def back(g, grads):
            _acc(grads, a, _unbroadcast(g * vb, va.shape))
            _acc(grads, b, _unbroadcast(g * va, vb.shape))

        return self._push(out, back)

    def matmul(self, a: int, b: int) -> int:
        """Matrix @ vector or matrix @ matrix, or batch @ matrix."""
        va, vb = self.values[a], self.values[b]
        if va.ndim != 2 or vb.ndim not in (1, 2) or va.shape[1] != vb.shape[0]:
            raise ShapeError(f"matmul: shapes {va.shape} and {vb.shape} do not conform")
        out = va @ vb
        if vb.ndim == 1:

            def back(g, grads):
                _acc(grads, a, np.outer(g, vb))
                _acc(grads, b, va.T @ g)

        else:

            def back(g, grads):
                _acc(grads, a, g @ vb.T)
                _acc(grads, b, va.T @ g)

        return self._push(out, back)

    def matvec(self, m: int, v: int) -> int:
        if self.values[v].ndim != 1:
            raise ShapeError(f"matvec: right operand must be a vector, got shape {self.values[v].shape}")
        return self.matmul(m, v)

    def transpose(self, a: int) -> int:
        va = self.values[a]
        if va.ndim != 2:
            raise ShapeError(f"transpose: needs a matrix, got shape {va.shape}")

        def back(g, grads):
            _acc(grads, a, g.T)

        return self._push(va.T, back)

    # -- reductions ------------------------------------------------------

    def sum(self, a: int) -> int:
        """Full reduction to a scalar."""
        va = self.values[a]
        out = np.asarray(va.sum())

        def back(g, grads):
            _acc(grads, a, np.broadcast_to(g, va.shape))

        return self._push(out, back)

    def mean(self, a: int) -> int:
        n = self.values[a].size
        return self.mul(self.sum(a), self.leaf(1.0 / n))

    # -- nonlinearities ---------------------------------------------------

    def tanh(self, a: int) -> int:
        out = np.tanh(self.values[a])

        def back(g, grads):
            _acc(grads, a, g * (1.0 - out * out))

        return self._push(out, back)

    def sigmoid(self, a: int) -> int:
        out = expit(self.values[a])

        def back(g, grads):
            _acc(grads, a, g * out * (1.0 - out))

        return self._push(out, back)

    def abs(self, a: int) -> int:
        va = self.values[a]
        out = np.abs(va)

        def back(g, grads):
            _acc(grads, a, g * np.sign(va))

        return self._push(out, back)

    def softmax(self, a: int, axis: int = -1) -> int:
        """Max-subtracted softmax along `axis` of a vector or matrix."""
        va = self.values[a]
        if va.ndim == 0:
            raise ShapeError("softmax: needs a vector or matrix, got a scalar")
        out = _softmax(va, axis=axis)

        def back(g, grads):
            dot = (g * out).sum(axis=axis, keepdims=True)
            _acc(grads, a, out * (g - dot))

        return self._push(out, back)

    # -- structural -------------------------------------------------------

    def stack_cols(self, columns: Sequence[int]) -> int:
        """Stack 1-D nodes of equal length into the columns of a matrix."""
        vals = [self.values[c] for c in columns]
        for v in vals:
            if v.ndim != 1 or v.shape != vals[0].shape:
                raise ShapeError(f"stack_cols: needs equal-length vectors, got {[x.shape for x in vals]}")
        out = np.stack(vals, axis=1)
        cols = tuple(columns)

        def back(g, grads):
            for j, c in enumerate(cols):
                _acc(grads, c, g[:, j])

        return self._push(out, back)

    def gather(self, a: int, index) -> int:
        """Select entries of a 1-D node by integer index (with repeats)."""
        va = self.values[a]
        if va.ndim != 1:
            raise ShapeError(f"gather: needs a vector, got shape {va.shape}")
        idx = np.asarray(index, dtype=np.intp)
        out = va[idx]

        def back(g, grads):
            ga = np.zeros_like(va)
            np.add.at(ga, idx, g)
            _acc(grads, a, ga)

        return self._push(out, back)

    def concat(self, parts: Sequence[int]) -> int:
        """Concatenate 1-D nodes."""
        vals = [self.values[p] for p in parts]
        for v in vals:
            if v.ndim != 1:
                raise ShapeError(f"concat: needs vectors, got {[x.shape for x in vals]}")
        out = np.concatenate(vals)
        spans = []
        offset = 0
        for p, v in zip(parts, vals):
            spans.append((p, offset, offset + v.shape[0]))
            offset += v.shape[0]

        def back(g, grads):
            for p, lo, hi in spans:
                _acc(grads, p, g[lo:hi])

        return self._push(out, back)

    def value(self, a: int) -> np.ndarray:
        return self.values[a]


def backward(tape: Tape, output: int) -> dict[str, np.ndarray]:
    """Reverse sweep from a scalar output node.

    Accumulates into each registered parameter's `.grad` and returns the
    gradient map keyed by parameter name. Gradients of non-parameter
    leaves are discarded.
    """
    out_val = tape.values[output]
    if out_val.shape != ():
        raise ShapeError(f"backward: output must be a scalar, got shape {out_val.shape}")
    grads: list = [None] * len(tape.values)
    grads[output] = np.ones(())
    backs = tape._backs
    for i in range(output, -1, -1):
        g = grads[i]
        if g is None:
            continue
        b = backs[i]
        if b is not None:
            b(g, grads)
    result: dict[str, np.ndarray] = {}
    for idx, p in tape._param_nodes:
        g = grads[idx]
        if g is None:
            g = np.zeros_like(p.value)
        else:
            g = np.asarray(g, dtype=np.float64).reshape(np.shape(p.value))
        p.grad = p.grad + g
        result[p.name] = g
    return result
