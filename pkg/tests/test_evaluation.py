import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointnlu.corpus import Span, TaggedSentence, extract_spans
from jointnlu.evaluation import (UndefinedMetricError, accuracy,
                                 evaluate_predictions, intent_accuracy,
                                 overall_accuracy, span_prf, token_accuracy)


def sent(tokens, tags, intents=("x",)):
    return TaggedSentence(tuple(tokens), tuple(tags), frozenset(intents))


class TestSpanPrf:
    def test_perfect(self):
        gold = [{Span(0, 1, "a")}, {Span(2, 2, "b")}]
        assert span_prf(gold, [set(g) for g in gold]) == (1.0, 1.0, 1.0)

    def test_empty_predictions(self):
        gold = [{Span(0, 0, "a")}]
        assert span_prf(gold, [set()]) == (0.0, 0.0, 0.0)

    def test_hand_counts(self):
        gold = [{Span(1, 1, "a"), Span(4, 4, "b")}]
        pred = [{Span(1, 1, "a"), Span(4, 4, "c"), Span(6, 6, "b")}]
        p, r, f = span_prf(gold, pred)
        assert p == pytest.approx(1 / 3)
        assert r == pytest.approx(1 / 2)
        assert f == pytest.approx(0.4)

    def test_type_must_match(self):
        p, r, f = span_prf([{Span(0, 0, "a")}], [{Span(0, 0, "b")}])
        assert (p, r, f) == (0.0, 0.0, 0.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            span_prf([set()], [set(), set()])

    @given(st.lists(st.lists(st.sampled_from(["O", "B-x", "I-x", "B-y", "I-y"]),
                             min_size=1, max_size=10), min_size=1, max_size=6))
    @settings(deadline=None)
    def test_gold_vs_gold_is_perfect(self, tag_seqs):
        spans = [extract_spans(t) for t in tag_seqs]
        if not any(spans):
            p, r, f = span_prf(spans, spans)
            assert (p, r, f) == (0.0, 0.0, 0.0)  # zero-division convention
        else:
            assert span_prf(spans, spans) == (1.0, 1.0, 1.0)

    def test_harmonic_identity(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            gold = [{Span(i, i, "a") for i in range(rng.integers(0, 4))}]
            pred = [{Span(i, i, "a") for i in range(rng.integers(1, 5))}]
            p, r, f = span_prf(gold, pred)
            if p + r > 0:
                assert abs(f * (p + r) - 2 * p * r) < 1e-12


class TestIntentAccuracy:
    def test_all_correct(self):
        golds = [frozenset(["a"]), frozenset(["b"])]
        assert intent_accuracy(golds, ["a", "b"]) == 1.0

    def test_multi_label_rule(self):
        golds = [frozenset(["flight", "airfare"])]
        assert intent_accuracy(golds, ["flight"]) == 1.0
        assert intent_accuracy(golds, ["airfare"]) == 1.0
        assert intent_accuracy(golds, ["ground"]) == 0.0

    def test_composite_prediction_components(self):
        golds = [frozenset(["flight"])]
        assert intent_accuracy(golds, ["flight#airfare"]) == 1.0

    def test_half_correct(self):
        golds = [frozenset(["a"])] * 4
        assert intent_accuracy(golds, ["a", "a", "b", "c"]) == 0.5

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            intent_accuracy([frozenset(["a"])], [])

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            intent_accuracy([], [])


class TestTokenAccuracy:
    def test_perfect(self):
        assert token_accuracy([("O", "B-x")], [("O", "B-x")]) == 1.0

    def test_partial(self):
        assert token_accuracy([("O", "B-x", "O", "O")], [("O", "O", "O", "O")]) \
            == pytest.approx(0.75)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            token_accuracy([("O",)], [("O", "O")])


class TestOverallAccuracy:
    def test_perfect(self):
        golds = [sent(["a"], ["O"], ("p",))]
        assert overall_accuracy(golds, [["O"]], ["p"]) == 1.0

    def test_one_token_wrong_in_one_of_two(self):
        golds = [sent(["a", "b"], ["O", "B-x"], ("p",)),
                 sent(["c"], ["O"], ("q",))]
        pred_tags = [["O", "O"], ["O"]]
        assert overall_accuracy(golds, pred_tags, ["p", "q"]) == 0.5

    def test_hand_four_sentence_fixture(self):
        golds = [
            sent(["a"], ["O"], ("p",)),             # tags ok, intent ok
            sent(["b"], ["B-x"], ("p",)),           # tags wrong
            sent(["c"], ["O"], ("p", "q")),         # intent matches one of gold
            sent(["d"], ["O"], ("p",)),             # intent wrong
        ]
        pred_tags = [["O"], ["O"], ["O"], ["O"]]
        pred_intents = ["p", "p", "q", "z"]
        assert overall_accuracy(golds, pred_tags, pred_intents) == pytest.approx(0.5)

    def test_misalignment(self):
        with pytest.raises(ValueError):
            overall_accuracy([sent(["a"], ["O"])], [["O"]], [])


class TestAccuracy:
    def test_perfect(self):
        assert accuracy(1, 1, 0, 0) == 1.0

    def test_all_wrong(self):
        assert accuracy(0, 0, 1, 1) == 0.0

    def test_arithmetic(self):
        assert accuracy(3, 2, 1, 4) == 0.5

    def test_undefined(self):
        with pytest.raises(UndefinedMetricError):
            accuracy(0, 0, 0, 0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            accuracy(-1, 0, 0, 0)


class TestEvaluatePredictions:
    @pytest.fixture
    def fixture(self):
        golds = [sent(["a", "b"], ["B-x", "O"], ("p",)),
                 sent(["c", "d"], ["O", "B-y"], ("q",))]
        pred_tags = [["B-x", "O"], ["O", "O"]]
        pred_intents = ["p", "r"]
        return golds, pred_tags, pred_intents

    def test_report_values(self, fixture):
        report = evaluate_predictions(*fixture)
        assert report.precision == 1.0
        assert report.recall == 0.5
        assert report.f1 == pytest.approx(2 / 3)
        assert report.intent_accuracy == 0.5
        assert report.token_accuracy == pytest.approx(0.75)
        assert report.overall_accuracy == 0.5
        assert (report.span_tp, report.span_fp, report.span_fn) == (1, 0, 1)
        assert (report.intent_tp, report.intent_fp) == (1, 1)
        assert report.per_type["x"] == (1.0, 1.0, 1.0)
        assert report.per_type["y"] == (0.0, 0.0, 0.0)

    def test_overall_bounded_by_intent_accuracy(self, fixture):
        report = evaluate_predictions(*fixture)
        assert report.overall_accuracy <= report.intent_accuracy + 1e-12

    def test_permutation_invariance(self, fixture):
        golds, tags, intents = fixture
        fwd = evaluate_predictions(golds, tags, intents)
        rev = evaluate_predictions(golds[::-1], tags[::-1], intents[::-1])
        for key in fwd.KEYS:
            assert getattr(fwd, key) == getattr(rev, key)

    def test_text_format(self, fixture):
        text = evaluate_predictions(*fixture).to_text()
        lines = text.strip().splitlines()
        assert lines[0].startswith("precision: ")
        assert any(line.startswith("type.x: ") for line in lines)

    def test_json_round_trip(self, fixture):
        report = evaluate_predictions(*fixture)
        data = json.loads(report.to_json())
        assert data["f1"] == pytest.approx(report.f1)
