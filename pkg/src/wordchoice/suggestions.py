"""Ranked suggestion lists shared by the model, the baselines and the
evaluation harness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import RESERVED, Vocabulary


@dataclass(frozen=True)
class Suggestion:
    """One ranked candidate.

    ``score`` is a probability for the neural models and a negative log
    perplexity for the n-gram baseline; in both cases larger is better and
    lists are sorted descending.
    """

    word: str
    score: float


def top_k_from_probs(probs: np.ndarray, vocab: Vocabulary, k: int) -> list[Suggestion]:
    """Best k non-reserved words by probability, ties by ascending id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n_reserved = len(RESERVED)
    ids = np.arange(n_reserved, len(vocab))
    sub = probs[n_reserved:]
    order = np.lexsort((ids, -sub))
    picked = ids[order[:k]]
    return [Suggestion(vocab.word(int(i)), float(probs[i])) for i in picked]
