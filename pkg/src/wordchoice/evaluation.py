"""Strict-MRR evaluation of suggestion pipelines.

A test case marks one target word in a sentence together with the
correction(s) accepted as gold.  The strict protocol scores each case by
the reciprocal rank of the first gold hit in the pipeline's top-k list
(0 when absent), and reports the mean over cases, overall and broken down
by error type.  Multi-gold variants widen the gold set with words accepted
by human annotators, which can only raise reciprocal ranks.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .corpus import EncodedSentence, SentenceTooLongError, Vocabulary, encode
from .posfilter import TagSource, filter_candidates
from .suggestions import Suggestion

#: Protocol notes repeated in every report so consumers see the exact
#: conventions used (they are choices, not universal).
PROTOCOL_NOTES = [
    "multi-gold sets always include the original editor correction",
    "POS filter is bypassed (list unfiltered) when the original word has no lexicon entry",
    "cases whose sentence exceeds the length limit are skipped and excluded from the MRR denominator",
]


@dataclass(frozen=True)
class TestCase:
    """One marked-target sentence with its accepted corrections."""

    __test__ = False  # not a pytest class, despite the name

    tokens: tuple[str, ...]
    target_index: int
    original: str
    golds: frozenset[str]
    error_type: str | None = None

    def validate(self) -> None:
        if not self.tokens:
            raise ValueError("empty token list")
        if not 0 <= self.target_index < len(self.tokens):
            raise ValueError(f"target_index {self.target_index} out of range")
        if self.tokens[self.target_index] != self.original:
            raise ValueError(
                f"original {self.original!r} does not match token "
                f"{self.tokens[self.target_index]!r} at target_index")
        if not self.golds:
            raise ValueError("golds must be non-empty")
        if self.original in self.golds:
            raise ValueError("the original word cannot be its own gold correction")


def load_testset(path: str) -> list[TestCase]:
    """JSON Lines loader; accepts the single-gold shorthand ``"gold"``."""
    cases = []
    with open(path, encoding="utf-8") as fh:
        for idx, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                golds = obj["golds"] if "golds" in obj else [obj["gold"]]
                case = TestCase(
                    tokens=tuple(obj["tokens"]),
                    target_index=int(obj["target_index"]),
                    original=str(obj["original"]),
                    golds=frozenset(str(g) for g in golds),
                    error_type=obj.get("error_type"),
                )
                case.validate()
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: invalid test case at index {idx}: {exc}") from exc
            cases.append(case)
    return cases


def reciprocal_rank(suggestions: Sequence[Suggestion], golds: Iterable[str]) -> float:
    """1/rank of the first suggestion in ``golds``; 0 when none is."""
    gold_set = set(golds)
    for rank, s in enumerate(suggestions, start=1):
        if s.word in gold_set:
            return 1.0 / rank
    return 0.0


@dataclass
class PipelineOutput:
    suggestions: list[Suggestion]
    bypassed: bool = False
    original_oov: bool = False


#: A pipeline maps a test case to its ranked, filtered suggestions; it
#: raises SentenceTooLongError for sentences the model cannot accept.
Pipeline = Callable[[TestCase], PipelineOutput]


def make_model_pipeline(model, lexicon: TagSource | None, k: int = 100,
                        filter_pos: bool = True) -> Pipeline:
    """Standard two-step pipeline: model distribution, then POS filter.

    ``model`` is anything with ``vocab``, ``hyper.max_len`` and a
    ``suggest(sent, i, k)`` / ``rank(sent, i, k)`` method (the
    bidirectional model or an RNNLM baseline).
    """
    rank_fn = getattr(model, "suggest", None) or model.rank

    def pipeline(case: TestCase) -> PipelineOutput:
        tokens = [t.lower() for t in case.tokens]
        sent = encode(tokens, model.vocab, model.hyper.max_len)
        raw = rank_fn(sent, case.target_index + 1, k)
        oov = case.original.lower() not in model.vocab
        if lexicon is None or not filter_pos:
            return PipelineOutput(raw, bypassed=False, original_oov=oov)
        result = filter_candidates(lexicon, case.original, raw)
        return PipelineOutput(result.suggestions[:k], result.bypassed, oov)

    return pipeline


def make_ngram_pipeline(table, lexicon: TagSource | None, k: int = 100,
                        max_len: int = 40) -> Pipeline:
    """Every non-reserved table word is a candidate, ranked by
    whole-sentence perplexity; the POS filter then applies as usual."""
    from .corpus import RESERVED

    candidates = [w for w in table.vocab_words if w not in RESERVED]

    def pipeline(case: TestCase) -> PipelineOutput:
        tokens = [t.lower() for t in case.tokens]
        if len(tokens) > max_len:
            raise SentenceTooLongError(len(tokens), max_len)
        ranked = table.rank_candidates(tokens, case.target_index, candidates)
        oov = case.original.lower() not in table.vocab_index
        if lexicon is None:
            return PipelineOutput(ranked[:k], bypassed=False, original_oov=oov)
        result = filter_candidates(lexicon, case.original, ranked)
        return PipelineOutput(result.suggestions[:k], result.bypassed, oov)

    return pipeline


@dataclass
class CaseResult:
    index: int
    rr: float
    error_type: str | None
    skipped: bool = False


@dataclass
class EvalReport:
    """Per-case reciprocal ranks and their aggregates."""

    per_case: list[CaseResult]
    mrr: float
    per_type: dict[str, tuple[int, float]]  # type -> (case count, MRR)
    skipped: int
    bypassed: int
    original_oov: int
    notes: list[str] = field(default_factory=lambda: list(PROTOCOL_NOTES))

    def to_json_dict(self) -> dict:
        return {
            "mrr": self.mrr,
            "cases": len(self.per_case),
            "evaluated": len(self.per_case) - self.skipped,
            "skipped": self.skipped,
            "bypassed": self.bypassed,
            "original_oov": self.original_oov,
            "per_type": {
                t: {"cases": n, "mrr": m} for t, (n, m) in sorted(self.per_type.items())
            },
            "per_case": [
                {"index": c.index, "rr": c.rr, "error_type": c.error_type,
                 "skipped": c.skipped}
                for c in self.per_case
            ],
            "notes": self.notes,
        }

    def to_table(self) -> str:
        """Aligned plain-text breakdown: error type, case count, MRR."""
        rows = [(t, str(n), f"{m:.4f}") for t, (n, m) in sorted(self.per_type.items())]
        rows.append(("all errors", str(len(self.per_case) - self.skipped), f"{self.mrr:.4f}"))
        head = ("error type", "cases", "MRR")
        widths = [max(len(r[i]) for r in rows + [head]) for i in range(3)]
        lines = [
            "  ".join(h.ljust(w) for h, w in zip(head, widths)),
            "  ".join("-" * w for w in widths),
        ]
        lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
        return "\n".join(lines)


def evaluate(pipeline: Pipeline, cases: Sequence[TestCase], threads: int = 1) -> EvalReport:
    """Run the pipeline on every case and aggregate reciprocal ranks.

    Cases are independent; with ``threads > 1`` they run in a pool but are
    aggregated in case order, so the report is identical either way.
    """
    for idx, case in enumerate(cases):
        try:
            case.validate()
        except ValueError as exc:
            raise ValueError(f"invalid test case at index {idx}: {exc}") from exc

    results: list[CaseResult] = []
    bypassed = 0
    oov = 0
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(_one_case(pipeline), enumerate(cases)))
    else:
        outs = [_one_case(pipeline)(item) for item in enumerate(cases)]
    for res, was_bypassed, was_oov in outs:
        results.append(res)
        bypassed += was_bypassed
        oov += was_oov

    # Aggregate in exact rational arithmetic (reciprocal ranks are exact
    # rationals), then project to float: the per-type means weighted by
    # case counts then average exactly to the overall MRR.
    scored = [r for r in results if not r.skipped]
    mrr = float(sum(Fraction(r.rr) for r in scored) / len(scored)) if scored else 0.0
    per_type: dict[str, tuple[int, float]] = {}
    for t in {r.error_type or "(none)" for r in scored}:
        group = [Fraction(r.rr) for r in scored if (r.error_type or "(none)") == t]
        per_type[t] = (len(group), float(sum(group) / len(group)))
    return EvalReport(
        per_case=results,
        mrr=mrr,
        per_type=per_type,
        skipped=sum(r.skipped for r in results),
        bypassed=bypassed,
        original_oov=oov,
    )


def _one_case(pipeline: Pipeline):
    def run(item: tuple[int, TestCase]) -> tuple[CaseResult, bool, bool]:
        idx, case = item
        try:
            out = pipeline(case)
        except SentenceTooLongError:
            return CaseResult(idx, 0.0, case.error_type, skipped=True), False, False
        rr = reciprocal_rank(out.suggestions, case.golds)
        return CaseResult(idx, rr, case.error_type), out.bypassed, out.original_oov

    return run


def build_multigold_sets(
    base: Sequence[TestCase],
    annotator_a: Sequence[Iterable[str]],
    annotator_b: Sequence[Iterable[str]],
) -> tuple[list[TestCase], list[TestCase]]:
    """Widen gold sets with human-annotator acceptances.

    ``combined`` golds are editor gold + A + B; ``intersection`` golds are
    editor gold + (A & B).  The editor's correction is always kept.  Words
    equal to the case's original are discarded from the annotator sets
    (the written word is never a correction).
    """
    if len(annotator_a) != len(base) or len(annotator_b) != len(base):
        raise ValueError(
            f"annotator lists must align with the {len(base)} base cases "
            f"(got {len(annotator_a)} and {len(annotator_b)})")
    combined, intersection = [], []
    for case, a_raw, b_raw in zip(base, annotator_a, annotator_b):
        a = set(a_raw) - {case.original}
        b = set(b_raw) - {case.original}
        combined.append(
            TestCase(case.tokens, case.target_index, case.original,
                     frozenset(case.golds | a | b), case.error_type))
        intersection.append(
            TestCase(case.tokens, case.target_index, case.original,
                     frozenset(case.golds | (a & b)), case.error_type))
    return combined, intersection
