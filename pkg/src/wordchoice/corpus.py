"""Corpus preparation: tokenization, vocabulary, encoding, batching.

The corpus file format is UTF-8 plain text with one sentence per line.
All downstream components (the bidirectional model, the baselines, the
evaluation harness) consume token sequences produced by :func:`tokenize`,
so this module is the single tokenization authority.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

START = "<start>"
STOP = "<stop>"
UNK = "<unk>"
RESERVED = (START, STOP, UNK)

START_ID = 0
STOP_ID = 1
UNK_ID = 2

#: Fill value used to pad batches to a common length.  Correctness never
#: depends on the fill id itself: the batch mask is the contract.
FILL_ID = STOP_ID

DEFAULT_MAX_VOCAB = 30000
DEFAULT_MAX_LEN = 40

_PUNCT = set(string.punctuation)


class SentenceTooLongError(ValueError):
    """Sentence exceeds the maximum length accepted by the models."""

    def __init__(self, length: int, max_len: int):
        super().__init__(f"sentence has {length} tokens, limit is {max_len}")
        self.length = length
        self.max_len = max_len


def tokenize(text: str) -> list[str]:
    """Split one line of text into lowercase tokens.

    Tokens are whitespace-delimited; leading and trailing ASCII
    punctuation is split off into separate single-character tokens, while
    internal punctuation (hyphens, apostrophes) is preserved, so
    "state-of-the-art." yields ["state-of-the-art", "."].
    """
    tokens: list[str] = []
    for chunk in text.lower().split():
        head: list[str] = []
        tail: list[str] = []
        start, end = 0, len(chunk)
        while start < end and chunk[start] in _PUNCT:
            head.append(chunk[start])
            start += 1
        while end > start and chunk[end - 1] in _PUNCT:
            tail.append(chunk[end - 1])
            end -= 1
        tokens.extend(head)
        if end > start:
            tokens.append(chunk[start:end])
        tokens.extend(reversed(tail))
    return tokens


def read_corpus(path: str) -> Iterator[list[str]]:
    """Yield one token sequence per line of a corpus file."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            yield tokenize(line)


class Vocabulary:
    """Bijection between surface words and dense integer ids.

    Ids 0, 1, 2 are the reserved ``<start>``, ``<stop>`` and ``<unk>``
    tokens; regular words occupy ids 3 and up.  All stored words are
    lowercase.
    """

    def __init__(self, words: Sequence[str] = ()):
        self.word_of: list[str] = list(RESERVED)
        self.id_of: dict[str, int] = {w: i for i, w in enumerate(RESERVED)}
        for w in words:
            self._add(w)

    def _add(self, word: str) -> None:
        word = word.lower()
        if word in self.id_of:
            raise ValueError(f"duplicate vocabulary word: {word!r}")
        self.id_of[word] = len(self.word_of)
        self.word_of.append(word)

    @property
    def size(self) -> int:
        return len(self.word_of)

    def __len__(self) -> int:
        return len(self.word_of)

    def __contains__(self, word: str) -> bool:
        return word in self.id_of

    def id(self, word: str) -> int:
        """Id of ``word``, or the ``<unk>`` id when out of vocabulary."""
        return self.id_of.get(word, UNK_ID)

    def word(self, idx: int) -> str:
        return self.word_of[idx]

    def save(self, path: str) -> None:
        """One word per line; line number = id - 3 (reserved ids implicit)."""
        with open(path, "w", encoding="utf-8") as fh:
            for w in self.word_of[len(RESERVED):]:
                fh.write(w + "\n")

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            return cls([line.rstrip("\n") for line in fh if line.rstrip("\n")])


def build_vocab(corpus: Iterable[Sequence[str]], max_vocab: int = DEFAULT_MAX_VOCAB) -> Vocabulary:
    """Vocabulary of the ``max_vocab`` most frequent words plus reserved ids.

    Frequency ties are broken by lexicographic word order so the result is
    deterministic and independent of how the corpus stream is chunked.
    """
    if max_vocab < 1:
        raise ValueError("max_vocab must be >= 1")
    counts: Counter[str] = Counter()
    for sentence in corpus:
        counts.update(w.lower() for w in sentence)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary([w for w, _ in ranked[:max_vocab]])


@dataclass(frozen=True)
class EncodedSentence:
    """Id sequence ``[<start>, w_1 .. w_real_len, <stop>]``."""

    ids: np.ndarray  # int64, length real_len + 2
    real_len: int

    def __post_init__(self):
        assert self.ids[0] == START_ID and self.ids[self.real_len + 1] == STOP_ID


def encode(sentence: Sequence[str], vocab: Vocabulary, max_len: int = DEFAULT_MAX_LEN) -> EncodedSentence:
    """Map tokens to ids, adding boundary tokens and ``<unk>`` for OOV words.

    Raises :class:`SentenceTooLongError` for sentences longer than
    ``max_len``; callers filter or report as appropriate.
    """
    if len(sentence) > max_len:
        raise SentenceTooLongError(len(sentence), max_len)
    ids = np.empty(len(sentence) + 2, dtype=np.int64)
    ids[0] = START_ID
    for j, w in enumerate(sentence):
        ids[j + 1] = vocab.id(w)
    ids[-1] = STOP_ID
    return EncodedSentence(ids, len(sentence))


def decode(enc: EncodedSentence, vocab: Vocabulary) -> list[str]:
    """Surface words of the real token positions (OOV comes back as <unk>)."""
    return [vocab.word(int(i)) for i in enc.ids[1:enc.real_len + 1]]


@dataclass(frozen=True)
class Batch:
    """Rows padded to a common length with a target-position mask.

    ``mask[r, p]`` is true exactly at real-word positions, never at
    ``<start>``, ``<stop>`` or fill positions; training sums errors over
    mask-true positions only.
    """

    ids: np.ndarray        # int64 (rows, padded_len)
    real_lens: np.ndarray  # int64 (rows,)
    mask: np.ndarray       # bool (rows, padded_len)

    @property
    def rows(self) -> int:
        return self.ids.shape[0]

    @property
    def padded_len(self) -> int:
        return self.ids.shape[1]

    @property
    def target_count(self) -> int:
        return int(self.mask.sum())


def pack_batch(sentences: Sequence[EncodedSentence]) -> Batch:
    """Pad a group of encoded sentences to their joint maximum length."""
    real_lens = np.array([s.real_len for s in sentences], dtype=np.int64)
    width = int(real_lens.max()) + 2 if len(sentences) else 2
    ids = np.full((len(sentences), width), FILL_ID, dtype=np.int64)
    mask = np.zeros((len(sentences), width), dtype=bool)
    for r, s in enumerate(sentences):
        ids[r, :s.real_len + 2] = s.ids
        mask[r, 1:s.real_len + 1] = True
    return Batch(ids, real_lens, mask)


def make_batches(
    sentences: Iterable[EncodedSentence],
    batch_size: int,
    seed: int,
) -> list[Batch]:
    """Shuffle deterministically from ``seed`` and pack into padded batches.

    The final partial batch is emitted.  ``batch_size=1`` gives the
    stochastic (one sentence per update) training stream.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    pool = list(sentences)
    order = np.random.default_rng(seed).permutation(len(pool))
    shuffled = [pool[i] for i in order]
    return [
        pack_batch(shuffled[i:i + batch_size])
        for i in range(0, len(shuffled), batch_size)
    ]
