"""Minimal dense linear algebra and differentiable primitives.

64-bit, deterministic, CPU-only: an LSTM cell with peephole connections,
a linear layer, stable softmax and cross-entropy, exact reverse-mode
gradients over a recorded tape, and plain SGD with global-norm clipping.
"""

from .ops import (
    LinearParams,
    LstmParams,
    LstmState,
    cross_entropy,
    glorot_limit,
    init_lstm,
    init_matrix,
    linear,
    lstm_step,
    run_lstm,
    softmax,
    softmax_cross_entropy,
    stable_sigmoid,
)
from .graph import LstmVars, ParamSet, lstm_cell, lstm_pass, reverse_for_suffix_pass
from .sgd import GradientSet, NonFiniteGradientError, global_grad_norm, sgd_update
from .tape import Tape, Var


def backward(tape: Tape, root: Var, params: ParamSet, seed: float = 1.0) -> GradientSet:
    """Reverse sweep from ``root``; returns the gradient of every parameter.

    Parameters the loss never touched come back with exactly-zero blocks.
    """
    tape.backward(root, seed)
    return params.grads()


__all__ = [
    "LinearParams", "LstmParams", "LstmState", "LstmVars", "ParamSet",
    "GradientSet", "NonFiniteGradientError", "Tape", "Var", "backward",
    "cross_entropy", "global_grad_norm", "glorot_limit", "init_lstm",
    "init_matrix", "linear", "lstm_cell", "lstm_pass", "lstm_step",
    "reverse_for_suffix_pass", "run_lstm", "sgd_update", "softmax",
    "softmax_cross_entropy", "stable_sigmoid",
]
