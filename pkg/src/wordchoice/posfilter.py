"""Part-of-speech filtering of suggestion candidates.

A candidate survives when at least one of its lexicon senses shares a POS
tag with a sense of the originally written word.  When the original word
has no lexicon entry at all (closed-class words in a noun/verb/adj/adv
lexicon, say), the list passes through unchanged and the result is marked
as bypassed, so downstream reports can flag it.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

from .suggestions import Suggestion

POS_TAGS = frozenset(
    {"noun", "verb", "adj", "adv", "prep", "pron", "det", "conj", "modal", "other"}
)


class LexiconFormatError(ValueError):
    """Malformed lexicon file; carries the offending line number."""

    def __init__(self, path: str, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.lineno = lineno


class TagSource(ABC):
    """Anything that can report the possible POS tags of a word.

    The shipped implementation is the sense :class:`Lexicon`; a
    statistical tagger can be plugged in by implementing this interface.
    """

    @abstractmethod
    def tags_of(self, word: str) -> frozenset[str] | None:
        """Tag set for ``word``, or None when the word is unknown."""


class Lexicon(TagSource):
    """Word -> set-of-POS-tags mapping loaded from a TSV file.

    File format: ``word<TAB>comma-separated-tags``, UTF-8, lowercase;
    duplicate word lines merge their tag sets.
    """

    def __init__(self, entries: dict[str, frozenset[str]] | None = None):
        self._entries: dict[str, frozenset[str]] = dict(entries or {})

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._entries

    def tags_of(self, word: str) -> frozenset[str] | None:
        return self._entries.get(word.lower())

    @classmethod
    def load(cls, path: str) -> "Lexicon":
        entries: dict[str, set[str]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[0] or not parts[1]:
                    raise LexiconFormatError(path, lineno, f"expected 'word<TAB>tags', got {line!r}")
                word = parts[0].lower()
                tags = {t.strip() for t in parts[1].split(",")}
                for t in tags:
                    if t not in POS_TAGS:
                        raise LexiconFormatError(path, lineno, f"unknown POS tag {t!r}")
                entries.setdefault(word, set()).update(tags)
        return cls({w: frozenset(ts) for w, ts in entries.items()})


def load_lexicon(path: str) -> Lexicon:
    return Lexicon.load(path)


@dataclass(frozen=True)
class FilterResult:
    """Filtered candidates plus whether the filter was bypassed because
    the original word had no lexicon entry."""

    suggestions: list[Suggestion]
    bypassed: bool


def filter_candidates(
    lex: TagSource, original: str, candidates: Sequence[Suggestion]
) -> FilterResult:
    """Keep candidates sharing a POS sense with the original word.

    Output is always a subsequence of the input (order and scores
    untouched).  Candidates without a lexicon entry cannot demonstrate a
    shared sense and are dropped; an original without an entry bypasses
    the filter entirely.
    """
    original_tags = lex.tags_of(original)
    if original_tags is None:
        return FilterResult(list(candidates), bypassed=True)
    kept = []
    for cand in candidates:
        cand_tags = lex.tags_of(cand.word)
        if cand_tags is not None and cand_tags & original_tags:
            kept.append(cand)
    return FilterResult(kept, bypassed=False)
