"""Reverse-mode automatic differentiation over a recorded tape.

Every primitive below computes its forward value eagerly with numpy and
records a closure that routes the output gradient back to its parents.
Calling :meth:`Tape.backward` replays the recorded nodes in reverse
creation order, which is a valid topological order because parents always
exist before their children.

All arithmetic is 64-bit and single-threaded per graph; gradient
accumulation uses ``np.add.at`` / in-place adds in creation order, so
identical inputs produce bitwise-identical gradients.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

Array = np.ndarray


class Var:
    """A value in the computation graph, with a lazily allocated gradient.

    Leaf Vars (parameters, embeddings) are created directly and keep their
    gradient across a whole batch graph; interior Vars are created by the
    primitive functions and live on a :class:`Tape`.
    """

    __slots__ = ("value", "grad", "_backward")

    def __init__(self, value: Array, backward: Callable[[], None] | None = None):
        self.value = value
        self.grad: Array | None = None
        self._backward = backward

    def accum(self, g: Array) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        self.grad += g

    def grad_or_zeros(self) -> Array:
        return self.grad if self.grad is not None else np.zeros_like(self.value)


class Tape:
    """Recorded sequence of interior graph nodes."""

    def __init__(self):
        self.nodes: list[Var] = []

    def _record(self, value: Array, backward: Callable[[], None]) -> Var:
        v = Var(value, backward)
        self.nodes.append(v)
        return v

    def backward(self, root: Var, seed: float | Array = 1.0) -> None:
        """Propagate d(root)/d(everything) into .grad fields.

        ``seed`` is the upstream gradient of ``root`` (1.0 for a scalar
        loss).  Nodes whose gradient stayed ``None`` are skipped; their
        parameters keep an exactly-zero gradient.
        """
        root.accum(np.asarray(seed, dtype=root.value.dtype) * np.ones_like(root.value))
        for node in reversed(self.nodes):
            if node.grad is not None and node._backward is not None:
                node._backward()


def _as_leaf(x: Var | Array) -> Var:
    return x if isinstance(x, Var) else Var(np.asarray(x, dtype=np.float64))


# ---------------------------------------------------------------------------
# Primitives.  Shapes follow row-major batch conventions: activations are
# (rows, features); parameter matrices are (out_features, in_features).
# ---------------------------------------------------------------------------

def rows(tape: Tape, table: Var, idx: Array) -> Var:
    """Gather rows of an embedding table: out[j] = table[idx[j]]."""
    out_val = table.value[idx]

    def backward():
        if table.grad is None:
            table.grad = np.zeros_like(table.value)
        np.add.at(table.grad, idx, out.grad)

    out = tape._record(out_val, backward)
    return out


def matmul_t(tape: Tape, x: Var, w: Var) -> Var:
    """x @ w.T for x (rows, n) and parameter w (m, n)."""
    out_val = x.value @ w.value.T

    def backward():
        x.accum(out.grad @ w.value)
        w.accum(out.grad.T @ x.value)

    out = tape._record(out_val, backward)
    return out


def add(tape: Tape, a: Var, b: Var) -> Var:
    out_val = a.value + b.value

    def backward():
        a.accum(out.grad)
        b.accum(out.grad)

    out = tape._record(out_val, backward)
    return out


def add_bias(tape: Tape, x: Var, b: Var) -> Var:
    """Add a bias vector to every row of x."""
    out_val = x.value + b.value

    def backward():
        x.accum(out.grad)
        b.accum(out.grad.sum(axis=0) if out.grad.ndim == 2 else out.grad)

    out = tape._record(out_val, backward)
    return out


def sigmoid(tape: Tape, x: Var) -> Var:
    # Split by sign so exp never overflows.
    v = x.value
    out_val = np.where(v >= 0, 1.0 / (1.0 + np.exp(-np.abs(v))),
                       np.exp(-np.abs(v)) / (1.0 + np.exp(-np.abs(v))))

    def backward():
        x.accum(out.grad * out_val * (1.0 - out_val))

    out = tape._record(out_val, backward)
    return out


def tanh(tape: Tape, x: Var) -> Var:
    out_val = np.tanh(x.value)

    def backward():
        x.accum(out.grad * (1.0 - out_val * out_val))

    out = tape._record(out_val, backward)
    return out


def mul(tape: Tape, a: Var, b: Var) -> Var:
    out_val = a.value * b.value

    def backward():
        a.accum(out.grad * b.value)
        b.accum(out.grad * a.value)

    out = tape._record(out_val, backward)
    return out


def one_minus(tape: Tape, x: Var) -> Var:
    out_val = 1.0 - x.value

    def backward():
        x.accum(-out.grad)

    out = tape._record(out_val, backward)
    return out


def hstack(tape: Tape, a: Var, b: Var) -> Var:
    """Concatenate two (rows, *) blocks along the feature axis."""
    na = a.value.shape[-1]
    out_val = np.concatenate([a.value, b.value], axis=-1)

    def backward():
        a.accum(out.grad[..., :na])
        b.accum(out.grad[..., na:])

    out = tape._record(out_val, backward)
    return out


def pick_steps(tape: Tape, steps: Sequence[Var], step_idx: Array, row_idx: Array) -> Var:
    """Select per-target rows from a list of per-step state matrices.

    out[j] = steps[step_idx[j]].value[row_idx[j]]; used to pair each
    target position with the directional state that flanks it.
    """
    stacked = np.stack([s.value for s in steps])
    out_val = stacked[step_idx, row_idx]

    def backward():
        for s, step in enumerate(steps):
            sel = step_idx == s
            if not sel.any():
                continue
            if step.grad is None:
                step.grad = np.zeros_like(step.value)
            np.add.at(step.grad, row_idx[sel], out.grad[sel])

    out = tape._record(out_val, backward)
    return out


def softmax_xent(tape: Tape, z: Var, targets: Array) -> Var:
    """Fused softmax + cross-entropy over rows of z, in log space.

    Returns the per-row losses ``logsumexp(z_r) - z_r[target_r]``.  The
    gradient at the scores is the analytic ``q - onehot(target)``.
    """
    v = z.value
    m = v.max(axis=-1, keepdims=True)
    e = np.exp(v - m)
    denom = e.sum(axis=-1, keepdims=True)
    probs = e / denom
    r = np.arange(v.shape[0])
    out_val = (m.squeeze(-1) + np.log(denom.squeeze(-1))) - v[r, targets]

    def backward():
        g = probs.copy()
        g[r, targets] -= 1.0
        g *= out.grad[:, None]
        z.accum(g)

    out = tape._record(out_val, backward)
    return out


def total(tape: Tape, x: Var) -> Var:
    """Sum all entries into a scalar (0-d) Var."""
    out_val = np.asarray(x.value.sum())

    def backward():
        x.accum(np.broadcast_to(out.grad, x.value.shape))

    out = tape._record(out_val, backward)
    return out


def scale(tape: Tape, x: Var, c: float) -> Var:
    out_val = x.value * c

    def backward():
        x.accum(out.grad * c)

    out = tape._record(out_val, backward)
    return out
