import json
from fractions import Fraction

import numpy as np
import pytest

from wordchoice.evaluation import (
    EvalReport,
    PipelineOutput,
    TestCase,
    build_multigold_sets,
    evaluate,
    load_testset,
    make_model_pipeline,
    reciprocal_rank,
)
from wordchoice.suggestions import Suggestion


def sug(*words):
    return [Suggestion(w, 1.0 / (i + 1)) for i, w in enumerate(words)]


def case(tokens, idx, golds, error_type=None):
    return TestCase(tuple(tokens), idx, tokens[idx], frozenset(golds), error_type)


class TestReciprocalRank:
    def test_rank_one(self):
        assert reciprocal_rank(sug("show", "say"), {"show"}) == 1.0

    def test_rank_three(self):
        assert reciprocal_rank(sug("a", "b", "c", "d"), {"c"}) == pytest.approx(1 / 3)

    def test_miss_is_zero(self):
        assert reciprocal_rank(sug("a", "b"), {"zz"}) == 0.0

    def test_first_hit_counts(self):
        assert reciprocal_rank(sug("a", "gold1", "gold2"), {"gold1", "gold2"}) == 0.5


class TestCaseValidation:
    def test_original_must_match_token(self):
        with pytest.raises(ValueError, match="does not match"):
            TestCase(("a", "b"), 0, "b", frozenset({"c"})).validate()

    def test_original_not_gold(self):
        with pytest.raises(ValueError, match="own gold"):
            TestCase(("a", "b"), 0, "a", frozenset({"a"})).validate()

    def test_loader_reports_case_index(self, tmp_path):
        path = tmp_path / "t.jsonl"
        good = {"tokens": ["x", "y"], "target_index": 0, "original": "x", "gold": "z"}
        bad = {"tokens": ["x"], "target_index": 5, "original": "x", "gold": "z"}
        path.write_text(json.dumps(good) + "\n" + json.dumps(bad) + "\n")
        with pytest.raises(ValueError, match="index 1"):
            load_testset(str(path))

    def test_loader_gold_shorthand_and_golds(self, tmp_path):
        path = tmp_path / "t.jsonl"
        rows = [
            {"tokens": ["a", "b"], "target_index": 1, "original": "b", "gold": "c"},
            {"tokens": ["a", "b"], "target_index": 1, "original": "b",
             "golds": ["c", "d"], "error_type": "preposition"},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        cases = load_testset(str(path))
        assert cases[0].golds == {"c"}
        assert cases[1].golds == {"c", "d"}
        assert cases[1].error_type == "preposition"


def fixed_pipeline(table):
    """Pipeline stub mapping case.original -> suggestion words."""

    def pipeline(tc: TestCase) -> PipelineOutput:
        return PipelineOutput(sug(*table[tc.original]))

    return pipeline


class TestEvaluate:
    def test_mrr_arithmetic_exact(self):
        cases = [
            case(["w1", "x"], 0, {"hit1"}),
            case(["w2", "x"], 0, {"hit3"}),
            case(["w3", "x"], 0, {"absent"}),
        ]
        pipeline = fixed_pipeline({
            "w1": ["hit1", "b", "c"],
            "w2": ["a", "b", "hit3"],
            "w3": ["a", "b", "c"],
        })
        report = evaluate(pipeline, cases)
        assert report.mrr == float(Fraction(1, 1) + Fraction(1, 3)) / 3
        assert report.mrr == float(Fraction(4, 9))

    def test_per_type_weighted_average_is_overall(self):
        rng = np.random.default_rng(0)
        cases = []
        table = {}
        for i in range(30):
            w = f"w{i}"
            etype = ["prep", "verb tense", None][i % 3]
            cases.append(case([w, "x"], 0, {"gold"}, etype))
            pool = ["gold"] + [f"f{j}" for j in range(5)]
            order = rng.permutation(len(pool))
            table[w] = [pool[k] for k in order]
        report = evaluate(fixed_pipeline(table), cases)
        # exact identity over the per-case rationals...
        by_type: dict[str, list[Fraction]] = {}
        for r in report.per_case:
            by_type.setdefault(r.error_type or "(none)", []).append(Fraction(r.rr))
        weighted = sum(sum(g) for g in by_type.values()) / len(report.per_case)
        overall = sum(Fraction(r.rr) for r in report.per_case) / len(report.per_case)
        assert weighted == overall
        # ...and the reported floats are its exact projections
        assert report.mrr == float(overall)
        for t, group in by_type.items():
            count, mrr = report.per_type[t]
            assert count == len(group)
            assert mrr == float(sum(group) / len(group))

    def test_case_order_invariance(self):
        cases = [case([f"w{i}", "x"], 0, {"g"}) for i in range(10)]
        table = {f"w{i}": (["g"] if i % 2 else ["a", "g"]) for i in range(10)}
        r1 = evaluate(fixed_pipeline(table), cases)
        r2 = evaluate(fixed_pipeline(table), list(reversed(cases)))
        assert r1.mrr == r2.mrr

    def test_threads_match_serial(self):
        cases = [case([f"w{i}", "x"], 0, {"g"}) for i in range(20)]
        table = {f"w{i}": ["a"] * (i % 4) + ["g"] for i in range(20)}
        serial = evaluate(fixed_pipeline(table), cases, threads=1)
        parallel = evaluate(fixed_pipeline(table), cases, threads=8)
        assert serial.to_json_dict() == parallel.to_json_dict()

    def test_invalid_case_named(self):
        broken = TestCase(("a",), 0, "a", frozenset())
        with pytest.raises(ValueError, match="index 0"):
            evaluate(fixed_pipeline({}), [broken])

    def test_overlength_cases_skipped_not_dropped(self, tiny_model):
        lex = None
        pipeline = make_model_pipeline(tiny_model, lex, k=10)
        ok = case(["w1", "w2"], 0, {"w5"})
        too_long = case(["w1"] * 50, 0, {"w5"})
        report = evaluate(pipeline, [ok, too_long])
        assert report.skipped == 1
        assert len(report.per_case) == 2
        assert report.per_case[1].skipped

    def test_report_json_and_table(self):
        cases = [case(["w1", "x"], 0, {"g"}, "prep"), case(["w2", "x"], 0, {"g"}, "prep")]
        table = {"w1": ["g"], "w2": ["a", "g"]}
        report = evaluate(fixed_pipeline(table), cases)
        blob = report.to_json_dict()
        assert blob["mrr"] == pytest.approx(0.75)
        assert blob["per_type"]["prep"]["cases"] == 2
        assert "notes" in blob
        text = report.to_table()
        assert "prep" in text and "all errors" in text and "0.7500" in text


class TestMultiGold:
    def test_set_algebra(self):
        base = [case(["x", "y"], 0, {"g"})]
        combined, intersection = build_multigold_sets(base, [{"x1", "y1"}], [{"y1", "z1"}])
        assert combined[0].golds == {"g", "x1", "y1", "z1"}
        assert intersection[0].golds == {"g", "y1"}

    def test_empty_annotations_recover_strict(self):
        base = [case(["x", "y"], 0, {"g"})]
        combined, intersection = build_multigold_sets(base, [set()], [set()])
        assert combined[0].golds == {"g"} and intersection[0].golds == {"g"}

    def test_length_mismatch(self):
        base = [case(["x", "y"], 0, {"g"})]
        with pytest.raises(ValueError, match="align"):
            build_multigold_sets(base, [], [set()])

    def test_original_discarded_from_annotations(self):
        base = [case(["x", "y"], 0, {"g"})]
        combined, _ = build_multigold_sets(base, [{"x", "w"}], [set()])
        assert "x" not in combined[0].golds and "w" in combined[0].golds
        combined[0].validate()

    def test_monotonicity_on_random_fixtures(self):
        rng = np.random.default_rng(42)
        vocab = [f"v{i}" for i in range(30)]
        for trial in range(20):
            n_cases = int(rng.integers(2, 8))
            base, annA, annB, table = [], [], [], {}
            for ci in range(n_cases):
                w = f"w{trial}_{ci}"
                gold = vocab[int(rng.integers(0, len(vocab)))]
                base.append(case([w, "x"], 0, {gold}))
                annA.append({vocab[int(i)] for i in rng.integers(0, 30, size=rng.integers(0, 4))})
                annB.append({vocab[int(i)] for i in rng.integers(0, 30, size=rng.integers(0, 4))})
                order = rng.permutation(30)
                table[w] = [vocab[k] for k in order[:10]]
            combined, intersection = build_multigold_sets(base, annA, annB)
            pipeline = fixed_pipeline(table)
            m_strict = evaluate(pipeline, base).mrr
            m_inter = evaluate(pipeline, intersection).mrr
            m_comb = evaluate(pipeline, combined).mrr
            assert m_comb >= m_inter >= m_strict
