"""Order-N n-gram language model with interpolated modified Kneser-Ney
smoothing, plus whole-sentence-perplexity candidate ranking.

This module is the reference document for the exact estimator; the test
suite's independent oracle implements the same equations from scratch.

Counting
========
Each sentence ``w_1 .. w_m`` is padded to ``[<start>]*(N-1) + w_1..w_m +
[<stop>]``.  The *events* are the m real words and ``<stop>``; ``<start>``
only ever appears in contexts.  For every event and every n in 1..N the
n-gram ending at that event is counted.

The count table actually used at each order is:

* order N: the raw occurrence counts;
* order n < N: the continuation count ``|{v : raw_{n+1}(v . g) > 0}|``
  (number of distinct one-token left extensions seen in training), except
  that grams whose first token is ``<start>`` keep their raw counts, since
  the only possible left extension of a sentence-initial gram is another
  ``<start>``.

Discounts
=========
Per order, with n_k = number of grams of that order whose (used) count is
exactly k:

* if n_1 == 0 or n_2 == 0:  (D1, D2, D3+) = (0.5, 1.0, 1.5)
* otherwise, with Y = n_1 / (n_1 + 2 n_2):
    D1  = 1 - 2 Y n_2 / n_1
    D2  = 2 - 3 Y n_3 / n_2
    D3+ = 3 - 4 Y n_4 / n_3   (or 1.5 when n_3 == 0)
* clamped into [1e-3, 1], [1e-3, 2], [1e-3, 3] respectively.

A count-c gram is discounted by D(c) = D1, D2, or D3+ for c = 1, 2, >= 3.

Probabilities
=============
Let c_n be the used counts at order n, h a context of n-1 tokens,
``denom(h) = sum_w c_n(h w)`` and ``removed(h) = sum_w (c_n(h w) -
max(c_n(h w) - D(c_n(h w)), 0))``.  Then:

    p_n(w | h) = max(c_n(h w) - D(c_n(h w)), 0) / denom(h)
                 + (removed(h) / denom(h)) * p_{n-1}(w | h[1:])

with two boundary rules: an unseen context (denom = 0) backs off with
weight 1 to p_{n-1}, and the order-0 base distribution is uniform over the
closed vocabulary V = {event types seen in training} + {<unk>}.  Because
the interpolation weight equals the exact probability mass removed by
discounting, ``sum_{w in V} p(w | h) = 1`` identically, and every word in
V (including the unseen ``<unk>``) has strictly positive probability.

Scoring
=======
Whole-sentence perplexity uses the real words plus ``<stop>`` as events
(m + 1 of them), each conditioned on its full N-1 padded context, and is
``exp(-(1/(m+1)) * sum log p)``.  Candidate ranking substitutes each
candidate at the marked position and sorts by ascending perplexity,
reporting ``-log(perplexity)`` as the score; ties break by ascending id
in the table's sorted vocabulary.  Out-of-vocabulary tokens (in contexts,
events, or candidates) are mapped to ``<unk>`` before scoring.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from typing import Iterable, Sequence

from ..corpus import START, STOP, UNK
from ..suggestions import Suggestion

Gram = tuple[str, ...]

_D_FALLBACK = (0.5, 1.0, 1.5)
_D_FLOOR = 1e-3
_D_CAPS = (1.0, 2.0, 3.0)


def estimate_discounts(counts_of_counts: Counter[int]) -> tuple[float, float, float]:
    """Per-order (D1, D2, D3+) from count-of-count statistics, clamped."""
    n1, n2, n3, n4 = (counts_of_counts.get(k, 0) for k in (1, 2, 3, 4))
    if n1 == 0 or n2 == 0:
        d1, d2, d3 = _D_FALLBACK
    else:
        y = n1 / (n1 + 2.0 * n2)
        d1 = 1.0 - 2.0 * y * n2 / n1
        d2 = 2.0 - 3.0 * y * n3 / n2
        d3 = 3.0 - 4.0 * y * n4 / n3 if n3 > 0 else _D_FALLBACK[2]
    return tuple(
        min(max(d, _D_FLOOR), cap) for d, cap in zip((d1, d2, d3), _D_CAPS)
    )  # type: ignore[return-value]


class NGramTable:
    """Smoothed n-gram statistics: counts, discounts, and context sums.

    ``counts[n]`` maps n-grams to the used count (see module docstring);
    ``context_totals[n]`` and ``removed[n]`` cache the per-context
    denominator and discounted mass so lookups are O(order).
    """

    def __init__(
        self,
        order: int,
        counts: dict[int, dict[Gram, int]],
        discounts: dict[int, tuple[float, float, float]],
    ):
        self.order = order
        self.counts = counts
        self.discounts = discounts
        self.context_totals: dict[int, dict[Gram, int]] = {}
        self.removed: dict[int, dict[Gram, float]] = {}
        for n in range(1, order + 1):
            totals: dict[Gram, int] = defaultdict(int)
            removed: dict[Gram, float] = defaultdict(float)
            d_n = discounts[n]
            for gram, c in counts[n].items():
                ctx = gram[:-1]
                totals[ctx] += c
                removed[ctx] += c - max(c - _discount_for(d_n, c), 0.0)
            self.context_totals[n] = dict(totals)
            self.removed[n] = dict(removed)
        words = {g[0] for g in counts[1]}
        words.add(UNK)
        self.vocab_words: list[str] = sorted(words)
        self.vocab_index: dict[str, int] = {w: i for i, w in enumerate(self.vocab_words)}

    # -- queries -------------------------------------------------------------

    def has(self, gram: Gram) -> bool:
        """True when the gram is stored, either with a count of its own or
        as the context of longer grams."""
        n = len(gram)
        return gram in self.counts.get(n, {}) or gram in self.context_totals.get(n + 1, {})

    def map_token(self, token: str) -> str:
        t = token.lower()
        return t if t in self.vocab_index or t == START else UNK

    def prob(self, word: str, context: Sequence[str]) -> float:
        """p(word | last N-1 context tokens); tokens are unk-mapped here."""
        w = self.map_token(word)
        ctx = tuple(self.map_token(t) for t in context[-(self.order - 1):]) if self.order > 1 else ()
        return self._p(len(ctx) + 1, ctx, w)

    def _p(self, n: int, ctx: Gram, word: str) -> float:
        denom = self.context_totals[n].get(ctx, 0)
        if denom == 0:
            if n == 1:
                return 1.0 / len(self.vocab_words)
            return self._p(n - 1, ctx[1:], word)
        lower = 1.0 / len(self.vocab_words) if n == 1 else self._p(n - 1, ctx[1:], word)
        c = self.counts[n].get(ctx + (word,), 0)
        kept = max(c - _discount_for(self.discounts[n], c), 0.0) if c else 0.0
        gamma = self.removed[n][ctx] / denom
        return kept / denom + gamma * lower

    def logprob_events(self, tokens: Sequence[str]) -> list[float]:
        """log p of every event (each real word, then <stop>) given its
        full-order padded context."""
        mapped = [self.map_token(t) for t in tokens]
        stream = [START] * (self.order - 1) + mapped + [STOP]
        out = []
        for j in range(self.order - 1, len(stream)):
            ctx = tuple(stream[j - self.order + 1:j])
            out.append(math.log(self._p(len(ctx) + 1, ctx, stream[j])))
        return out

    def sentence_perplexity(self, tokens: Sequence[str]) -> float:
        """exp of the mean negative log probability over the sentence's
        real_len + 1 events."""
        lps = self.logprob_events(tokens)
        return math.exp(-sum(lps) / len(lps))

    def rank_candidates(
        self, tokens: Sequence[str], i: int, candidates: Sequence[str]
    ) -> list[Suggestion]:
        """Rank candidate fillers for position i by whole-sentence
        perplexity (ascending); score is -log(perplexity)."""
        if not 0 <= i < len(tokens):
            raise IndexError(f"target position {i} out of range")
        scored = []
        for cand in candidates:
            variant = list(tokens)
            variant[i] = cand
            ppl = self.sentence_perplexity(variant)
            tie = self.vocab_index.get(self.map_token(cand), len(self.vocab_words))
            scored.append((ppl, tie, cand))
        scored.sort(key=lambda t: (t[0], t[1]))
        return [Suggestion(cand, -math.log(ppl)) for ppl, _, cand in scored]

    # -- persistence -----------------------------------------------------------

    def save(self, path: str) -> None:
        """Sorted text form: a discount header block, then one line per
        stored gram: ``order<TAB>space-joined-ngram<TAB>count``."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"ngram-table\tv1\norder\t{self.order}\n")
            for n in range(1, self.order + 1):
                d = self.discounts[n]
                fh.write(f"discount\t{n}\t{d[0]!r} {d[1]!r} {d[2]!r}\n")
            for n in range(1, self.order + 1):
                for gram in sorted(self.counts[n]):
                    fh.write(f"{n}\t{' '.join(gram)}\t{self.counts[n][gram]}\n")

    @classmethod
    def load(cls, path: str) -> "NGramTable":
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines or lines[0] != "ngram-table\tv1":
            raise ValueError(f"{path}: not an n-gram table file")
        order = None
        discounts: dict[int, tuple[float, float, float]] = {}
        counts: dict[int, dict[Gram, int]] = {}
        for lineno, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            fields = line.split("\t")
            if fields[0] == "order":
                order = int(fields[1])
                counts = {n: {} for n in range(1, order + 1)}
            elif fields[0] == "discount":
                d1, d2, d3 = (float(x) for x in fields[2].split())
                discounts[int(fields[1])] = (d1, d2, d3)
            elif len(fields) == 3 and fields[0].isdigit():
                if order is None:
                    raise ValueError(f"{path}:{lineno}: gram line before order header")
                n = int(fields[0])
                counts[n][tuple(fields[1].split(" "))] = int(fields[2])
            else:
                raise ValueError(f"{path}:{lineno}: unparseable table line")
        if order is None or set(discounts) != set(range(1, order + 1)):
            raise ValueError(f"{path}: incomplete table header")
        return cls(order, counts, discounts)


def _discount_for(d: tuple[float, float, float], count: int) -> float:
    if count <= 0:
        return 0.0
    return d[0] if count == 1 else d[1] if count == 2 else d[2]


def ngram_train(corpus: Iterable[Sequence[str]], order: int = 5) -> NGramTable:
    """Build the smoothed table from tokenized sentences."""
    if order < 1:
        raise ValueError("order must be >= 1")
    raw: dict[int, Counter[Gram]] = {n: Counter() for n in range(1, order + 1)}
    preceders: dict[int, dict[Gram, set[str]]] = {
        n: defaultdict(set) for n in range(1, order)
    }
    n_sentences = 0
    for tokens in corpus:
        n_sentences += 1
        stream = [START] * (order - 1) + [t.lower() for t in tokens] + [STOP]
        for j in range(order - 1, len(stream)):
            for n in range(1, order + 1):
                gram = tuple(stream[j - n + 1:j + 1])
                raw[n][gram] += 1
                if n < order:
                    preceders[n][gram].add(stream[j - n])
    if n_sentences == 0:
        raise ValueError("cannot train an n-gram table on an empty corpus")

    counts: dict[int, dict[Gram, int]] = {order: dict(raw[order])}
    for n in range(1, order):
        counts[n] = {
            g: (raw[n][g] if g[0] == START else len(preceders[n][g]))
            for g in raw[n]
        }
    discounts = {
        n: estimate_discounts(Counter(counts[n].values()))
        for n in range(1, order + 1)
    }
    return NGramTable(order, counts, discounts)


def sentence_perplexity(table: NGramTable, tokens: Sequence[str]) -> float:
    return table.sentence_perplexity(tokens)


def ngram_rank(
    table: NGramTable, tokens: Sequence[str], i: int, candidates: Sequence[str]
) -> list[Suggestion]:
    return table.rank_candidates(tokens, i, candidates)
