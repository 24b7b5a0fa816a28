"""Deterministic synthetic corpora for experiments and the test suite.

Two generators:

* a *template* corpus of a few dozen fixed sentences repeated many times,
  where every word is fully determined by its surrounding context, so a
  capable context model can drive the loss toward zero and rank the held
  seen word first;
* a *joint-context* corpus where the slot word is a function of a left
  marker AND a right marker together, while either marker alone leaves it
  uniformly ambiguous.  Only a bidirectional reader can resolve it, which
  makes the corpus a clean probe for the bidirectional advantage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def template_corpus(
    n_sentences: int = 2000,
    n_templates: int = 40,
    seed: int = 7,
) -> list[list[str]]:
    """Fixed sentence shapes, each with four words unique to its template.

    Template i is ``the <noun_i> <verb_i> the <obj_i> <adv_i>``; the
    corpus cycles through templates, then shuffles deterministically.
    Vocabulary size is 4 * n_templates + 1 distinct words.
    """
    sentences = []
    for j in range(n_sentences):
        i = j % n_templates
        sentences.append(
            ["the", f"noun{i}", f"verb{i}", "the", f"obj{i}", f"adv{i}"])
    rng = np.random.default_rng(seed)
    order = rng.permutation(n_sentences)
    return [sentences[i] for i in order]


@dataclass(frozen=True)
class JointContextSpec:
    """Layout of the joint-context probe corpus."""

    n_markers: int = 5
    repeats: int = 24

    @property
    def slot_index(self) -> int:
        return 2  # [left_a, "alpha", slot, "beta", right_b]


def joint_context_corpus(spec: JointContextSpec = JointContextSpec(), seed: int = 11) -> list[list[str]]:
    """Sentences ``left_a alpha slot beta right_b`` where the slot word
    names the (a, b) pair: a prefix reader knows only a and faces n
    equally likely slot words (one per b), a suffix reader symmetrically,
    while both markers together pin the slot down exactly."""
    m = spec.n_markers
    sentences = []
    for _ in range(spec.repeats):
        for a in range(m):
            for b in range(m):
                sentences.append(
                    [f"left{a}", "alpha", f"mid{a}x{b}", "beta", f"right{b}"])
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(sentences))
    return [sentences[i] for i in order]


def joint_context_cases(spec: JointContextSpec = JointContextSpec()) -> list[tuple[list[str], int, str]]:
    """(tokens, slot index, gold word) for every marker combination."""
    m = spec.n_markers
    cases = []
    for a in range(m):
        for b in range(m):
            gold = f"mid{a}x{b}"
            cases.append(
                ([f"left{a}", "alpha", gold, "beta", f"right{b}"], spec.slot_index, gold))
    return cases


def write_corpus(path: str, sentences: list[list[str]]) -> None:
    """One sentence per line, the corpus file format."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in sentences:
            fh.write(" ".join(s) + "\n")
