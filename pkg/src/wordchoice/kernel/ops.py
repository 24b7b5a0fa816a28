"""Dense numeric primitives: LSTM cell, linear layer, softmax, cross-entropy.

These are the pure forward-value functions; the differentiable graph
versions live in :mod:`wordchoice.kernel.graph`.  Both share the same
arithmetic so a value computed either way agrees.

The LSTM cell uses input, forget and output gates with peephole terms on
the previous cell state:

    i = sigmoid(W_i x + U_i h + Y_i c + b_i)
    f = sigmoid(W_f x + U_f h + Y_f c + b_f)      (or 1 - i when coupled)
    o = sigmoid(W_o x + U_o h + Y_o c + b_o)
    g = tanh(W_g x + U_g h + b_g)
    c' = f * c + i * g
    h' = o * tanh(c')

The peephole matrices Y_* are full (hidden x hidden) parameter matrices.
``coupled_gates=True`` substitutes f = 1 - i and leaves the f-gate
parameters unused (their gradients stay exactly zero).
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterator

import numpy as np

Array = np.ndarray


def _check_vec(name: str, v: Array, dim: int) -> None:
    if v.shape[-1] != dim:
        raise ValueError(f"{name}: expected last dimension {dim}, got {v.shape}")


def stable_sigmoid(x: Array) -> Array:
    """Logistic function computed without overflowing exp."""
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


@dataclass
class LstmParams:
    """One direction's LSTM parameter set.

    ``W_*`` act on the input, ``U_*`` on the previous hidden state, and
    ``Y_*`` are peephole matrices acting on the previous cell state; the
    candidate gate ``g`` has no peephole.
    """

    W_i: Array
    W_f: Array
    W_o: Array
    W_g: Array
    U_i: Array
    U_f: Array
    U_o: Array
    U_g: Array
    Y_i: Array
    Y_f: Array
    Y_o: Array
    b_i: Array
    b_f: Array
    b_o: Array
    b_g: Array

    @classmethod
    def zeros(cls, hidden: int, input_dim: int) -> "LstmParams":
        m = lambda r, c: np.zeros((r, c), dtype=np.float64)
        v = lambda n: np.zeros(n, dtype=np.float64)
        return cls(
            W_i=m(hidden, input_dim), W_f=m(hidden, input_dim),
            W_o=m(hidden, input_dim), W_g=m(hidden, input_dim),
            U_i=m(hidden, hidden), U_f=m(hidden, hidden),
            U_o=m(hidden, hidden), U_g=m(hidden, hidden),
            Y_i=m(hidden, hidden), Y_f=m(hidden, hidden), Y_o=m(hidden, hidden),
            b_i=v(hidden), b_f=v(hidden), b_o=v(hidden), b_g=v(hidden),
        )

    @property
    def hidden(self) -> int:
        return self.W_i.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W_i.shape[1]

    def tensors(self) -> Iterator[tuple[str, Array]]:
        for f in fields(self):
            yield f.name, getattr(self, f.name)

    def validate(self) -> None:
        h, d = self.hidden, self.input_dim
        for name, t in self.tensors():
            want = (h, d) if name.startswith("W_") else (h, h) if name[0] in "UY" else (h,)
            if t.shape != want:
                raise ValueError(f"LSTM parameter {name}: shape {t.shape}, expected {want}")
            if not np.isfinite(t).all():
                raise ValueError(f"LSTM parameter {name} contains non-finite values")


@dataclass
class LstmState:
    """Hidden output ``h`` and cell state ``c`` after a step."""

    h: Array
    c: Array

    @classmethod
    def zeros(cls, hidden: int) -> "LstmState":
        return cls(np.zeros(hidden, dtype=np.float64), np.zeros(hidden, dtype=np.float64))


def lstm_step(params: LstmParams, x: Array, prev: LstmState, coupled_gates: bool = False) -> LstmState:
    """One LSTM cell application.

    ``x`` may be a single input vector or a (rows, input_dim) matrix with
    matching state matrices, thanks to the x @ W.T convention.
    """
    x = np.asarray(x, dtype=np.float64)
    _check_vec("x", x, params.input_dim)
    _check_vec("prev.h", prev.h, params.hidden)
    _check_vec("prev.c", prev.c, params.hidden)
    h, c = prev.h, prev.c
    i = stable_sigmoid(x @ params.W_i.T + h @ params.U_i.T + c @ params.Y_i.T + params.b_i)
    if coupled_gates:
        f = 1.0 - i
    else:
        f = stable_sigmoid(x @ params.W_f.T + h @ params.U_f.T + c @ params.Y_f.T + params.b_f)
    o = stable_sigmoid(x @ params.W_o.T + h @ params.U_o.T + c @ params.Y_o.T + params.b_o)
    g = np.tanh(x @ params.W_g.T + h @ params.U_g.T + params.b_g)
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return LstmState(h_new, c_new)


def run_lstm(params: LstmParams, inputs: Array, coupled_gates: bool = False) -> LstmState:
    """Fold the cell over a (steps, input_dim) sequence from zero state."""
    state = LstmState.zeros(params.hidden)
    for x in inputs:
        state = lstm_step(params, x, state, coupled_gates)
    return state


@dataclass
class LinearParams:
    """Affine map parameters: W (out_dim, in_dim) and bias b (out_dim,)."""

    W: Array
    b: Array

    @classmethod
    def zeros(cls, out_dim: int, in_dim: int) -> "LinearParams":
        return cls(np.zeros((out_dim, in_dim), dtype=np.float64),
                   np.zeros(out_dim, dtype=np.float64))

    @property
    def out_dim(self) -> int:
        return self.W.shape[0]

    @property
    def in_dim(self) -> int:
        return self.W.shape[1]


def linear(params: LinearParams, x: Array) -> Array:
    """W x + b (or X @ W.T + b row-wise for a matrix of inputs)."""
    x = np.asarray(x, dtype=np.float64)
    _check_vec("x", x, params.in_dim)
    return x @ params.W.T + params.b


def softmax(z: Array) -> Array:
    """Probabilities proportional to exp(z), max-subtracted for stability."""
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(q: Array, target: int) -> float:
    """-log q[target] for a probability vector q."""
    q = np.asarray(q, dtype=np.float64)
    if not 0 <= target < q.shape[-1]:
        raise IndexError(f"target {target} out of range for distribution of size {q.shape[-1]}")
    return float(-np.log(q[target]))


def softmax_cross_entropy(z: Array, target: int) -> float:
    """Cross-entropy of softmax(z) against ``target`` fused in log space."""
    z = np.asarray(z, dtype=np.float64)
    if not 0 <= target < z.shape[-1]:
        raise IndexError(f"target {target} out of range for scores of size {z.shape[-1]}")
    m = z.max()
    return float(m + np.log(np.exp(z - m).sum()) - z[target])


def glorot_limit(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_matrix(rng: np.random.Generator, rows: int, cols: int) -> Array:
    """Uniform [-s, s] with s = sqrt(6 / (rows + cols))."""
    s = glorot_limit(cols, rows)
    return rng.uniform(-s, s, size=(rows, cols))


def init_lstm(rng: np.random.Generator, hidden: int, input_dim: int) -> LstmParams:
    """Weight matrices uniform Glorot-style, biases zero.

    Draw order is fixed by the field order of :class:`LstmParams`, so a
    seeded generator yields bitwise-reproducible parameters.
    """
    p = LstmParams.zeros(hidden, input_dim)
    for name, t in p.tensors():
        if t.ndim == 2:
            setattr(p, name, init_matrix(rng, *t.shape))
    return p
