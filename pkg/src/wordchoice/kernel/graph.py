"""Differentiable composites built from tape primitives.

Bridges the plain-array parameter containers of :mod:`ops` into graph
:class:`Var` leaves (sharing the same storage, so in-place SGD updates are
visible to both views) and provides the recurrent pass used by the
bidirectional model and the RNNLM baselines.
"""

from __future__ import annotations

import numpy as np

from . import tape as T
from .ops import LinearParams, LstmParams
from .tape import Tape, Var

Array = np.ndarray


class LstmVars:
    """Var views over one direction's LSTM parameters."""

    def __init__(self, params: LstmParams):
        for name, arr in params.tensors():
            setattr(self, name, Var(arr))

    def vars(self) -> list[tuple[str, Var]]:
        names = ["W_i", "W_f", "W_o", "W_g", "U_i", "U_f", "U_o", "U_g",
                 "Y_i", "Y_f", "Y_o", "b_i", "b_f", "b_o", "b_g"]
        return [(n, getattr(self, n)) for n in names]


class ParamSet:
    """Ordered name -> Var registry for a whole model.

    Iteration order is registration order, which fixes the order of
    gradient clipping and SGD updates and keeps training bitwise
    deterministic.
    """

    def __init__(self):
        self._vars: dict[str, Var] = {}

    def add(self, name: str, array: Array) -> Var:
        v = Var(array)
        self._vars[name] = v
        return v

    def add_lstm(self, prefix: str, params: LstmParams) -> LstmVars:
        lv = LstmVars(params)
        for name, var in lv.vars():
            self._vars[f"{prefix}.{name}"] = var
        return lv

    def add_linear(self, prefix: str, params: LinearParams) -> tuple[Var, Var]:
        w = self.add(f"{prefix}.W", params.W)
        b = self.add(f"{prefix}.b", params.b)
        return w, b

    def zero_grads(self) -> None:
        for v in self._vars.values():
            v.grad = None

    def grads(self) -> dict[str, Array]:
        """Gradient per parameter; exactly zero where the loss never used it."""
        return {name: v.grad_or_zeros() for name, v in self._vars.items()}

    def arrays(self) -> dict[str, Array]:
        return {name: v.value for name, v in self._vars.items()}

    def items(self):
        return self._vars.items()

    def __getitem__(self, name: str) -> Var:
        return self._vars[name]


def lstm_cell(tape: Tape, p: LstmVars, x: Var, h: Var, c: Var, coupled_gates: bool = False) -> tuple[Var, Var]:
    """Graph version of :func:`ops.lstm_step` on (rows, dim) activations."""

    def gate(w, u, y, b, squash):
        z = T.add(tape, T.matmul_t(tape, x, w), T.matmul_t(tape, h, u))
        if y is not None:
            z = T.add(tape, z, T.matmul_t(tape, c, y))
        return squash(tape, T.add_bias(tape, z, b))

    i = gate(p.W_i, p.U_i, p.Y_i, p.b_i, T.sigmoid)
    f = T.one_minus(tape, i) if coupled_gates else gate(p.W_f, p.U_f, p.Y_f, p.b_f, T.sigmoid)
    o = gate(p.W_o, p.U_o, p.Y_o, p.b_o, T.sigmoid)
    g = gate(p.W_g, p.U_g, None, p.b_g, T.tanh)
    c_new = T.add(tape, T.mul(tape, f, c), T.mul(tape, i, g))
    h_new = T.mul(tape, o, T.tanh(tape, c_new))
    return h_new, c_new


def lstm_pass(
    tape: Tape,
    p: LstmVars,
    embeddings: Var,
    id_cols: Array,
    coupled_gates: bool = False,
) -> list[Var]:
    """Run the cell over token columns, returning the hidden state per step.

    ``id_cols`` is (rows, steps); step s consumes the embeddings of column
    s for every row.  States start at zero.
    """
    n_rows, n_steps = id_cols.shape
    hidden = p.b_i.value.shape[0]
    h = Var(np.zeros((n_rows, hidden)))
    c = Var(np.zeros((n_rows, hidden)))
    states: list[Var] = []
    for s in range(n_steps):
        x = T.rows(tape, embeddings, id_cols[:, s])
        h, c = lstm_cell(tape, p, x, h, c, coupled_gates)
        states.append(h)
    return states


def reverse_for_suffix_pass(ids: Array, real_lens: Array, fill_id: int) -> Array:
    """Per-row reversal of the real extent: column 0 holds each row's
    ``<stop>``, column s holds the token at position real_len + 1 - s.

    Rows shorter than the widest are padded with ``fill_id``; the extra
    steps produce states no target ever selects.
    """
    n_rows = ids.shape[0]
    width = int(real_lens.max()) if n_rows else 0
    out = np.full((n_rows, width), fill_id, dtype=ids.dtype)
    for r in range(n_rows):
        rl = int(real_lens[r])
        out[r, :rl] = ids[r, rl + 1:1:-1]
    return out
