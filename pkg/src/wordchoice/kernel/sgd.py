"""Plain SGD with optional global-norm gradient clipping."""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np

Array = np.ndarray

#: A GradientSet is a name -> accumulator mapping whose shapes mirror the
#: parameter tensors; accumulation across a batch is additive.
GradientSet = dict[str, Array]


class NonFiniteGradientError(ValueError):
    """A gradient tensor contains NaN or infinity."""

    def __init__(self, tensor_name: str):
        super().__init__(f"non-finite gradient in tensor {tensor_name!r}")
        self.tensor_name = tensor_name


def global_grad_norm(grads: Mapping[str, Array]) -> float:
    """L2 norm over the concatenation of every gradient tensor."""
    return math.sqrt(sum(float((g * g).sum()) for g in grads.values()))


def sgd_update(
    params: Mapping[str, Array],
    grads: Mapping[str, Array],
    lr: float,
    clip: float | None = None,
) -> None:
    """In-place step p <- p - lr * g, globally clipped when requested.

    When ``clip`` is set and the global gradient norm exceeds it, every
    gradient is scaled by clip/norm before the step.  Tensors are visited
    in the fixed iteration order of ``params`` so updates are bitwise
    reproducible.
    """
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    for name in params:
        if not np.isfinite(grads[name]).all():
            raise NonFiniteGradientError(name)
    factor = lr
    if clip is not None:
        norm = global_grad_norm(grads)
        if norm > clip:
            factor = lr * (clip / norm)
    for name, p in params.items():
        p -= factor * grads[name]
