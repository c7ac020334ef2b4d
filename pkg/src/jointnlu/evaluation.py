"""Span-level precision/recall/F1, intent accuracy under the any-gold-label
rule, token accuracy, and strict overall sentence accuracy."""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

from .corpus import extract_spans


class UndefinedMetricError(ValueError):
    """Raised when a metric has an all-zero denominator by definition."""


@dataclass
class MetricsReport:
    precision: float
    recall: float
    f1: float
    intent_accuracy: float
    token_accuracy: float
    overall_accuracy: float
    span_tp: int
    span_fp: int
    span_fn: int
    intent_tp: int
    intent_fp: int
    per_type: dict

    KEYS = ("precision", "recall", "f1", "intent_accuracy", "token_accuracy",
            "overall_accuracy", "span_tp", "span_fp", "span_fn",
            "intent_tp", "intent_fp")

    def to_text(self):
        lines = [f"{key}: {getattr(self, key)}" for key in self.KEYS]
        for etype in sorted(self.per_type):
            p, r, f = self.per_type[etype]
            lines.append(f"type.{etype}: {p} {r} {f}")
        return "\n".join(lines) + "\n"

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _prf(tp, fp, fn):
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def span_prf(gold_spans, pred_spans):
    """Micro-averaged span precision/recall/F1; a span is a true positive
    iff (start, end, type) matches exactly."""
    if len(gold_spans) != len(pred_spans):
        raise ValueError("gold and predicted lists differ in length")
    tp = fp = fn = 0
    for gold, pred in zip(gold_spans, pred_spans):
        gold, pred = set(gold), set(pred)
        tp += len(gold & pred)
        fp += len(pred - gold)
        fn += len(gold - pred)
    return _prf(tp, fp, fn)


def intent_accuracy(gold_sets, pred_labels):
    """An utterance counts correct iff the predicted label, or any component
    of a predicted composite, is a member of the gold set."""
    if len(gold_sets) != len(pred_labels):
        raise ValueError("gold and predicted lists differ in length")
    if not gold_sets:
        raise ValueError("empty evaluation set")
    correct = sum(_intent_correct(g, p) for g, p in zip(gold_sets, pred_labels))
    return correct / len(gold_sets)


def _intent_correct(gold_set, pred_label):
    return any(part in gold_set for part in str(pred_label).split("#"))


def token_accuracy(gold_tags, pred_tags):
    total = correct = 0
    for g, p in zip(gold_tags, pred_tags):
        if len(g) != len(p):
            raise ValueError("tag sequences differ in length")
        total += len(g)
        correct += sum(x == y for x, y in zip(g, p))
    return correct / total if total else 0.0


def overall_accuracy(gold_sentences, pred_tags, pred_intents):
    """Strict sentence accuracy: intent correct (any-gold-label rule) AND the
    full tag sequence matches token for token."""
    if not len(gold_sentences) == len(pred_tags) == len(pred_intents):
        raise ValueError("misaligned gold and prediction lists")
    correct = 0
    for sent, tags, intent in zip(gold_sentences, pred_tags, pred_intents):
        if tuple(tags) == tuple(sent.tags) and _intent_correct(sent.intents, intent):
            correct += 1
    return correct / len(gold_sentences) if gold_sentences else 0.0


def accuracy(tp, tn, fp, fn):
    """(TP + TN) / (TP + FP + TN + FN)."""
    if min(tp, tn, fp, fn) < 0:
        raise ValueError("counts must be nonnegative")
    total = tp + fp + tn + fn
    if total == 0:
        raise UndefinedMetricError("accuracy undefined on all-zero counts")
    return (tp + tn) / total


def evaluate_predictions(gold_sentences, pred_tags, pred_intents):
    """Full report over aligned gold sentences and predictions."""
    gold_span_sets = [extract_spans(s.tags) for s in gold_sentences]
    pred_span_sets = [extract_spans(t) for t in pred_tags]
    tp = fp = fn = 0
    by_type = {}
    for gold, pred in zip(gold_span_sets, pred_span_sets):
        tp += len(gold & pred)
        fp += len(pred - gold)
        fn += len(gold - pred)
        for sp in gold & pred:
            by_type.setdefault(sp.etype, [0, 0, 0])[0] += 1
        for sp in pred - gold:
            by_type.setdefault(sp.etype, [0, 0, 0])[1] += 1
        for sp in gold - pred:
            by_type.setdefault(sp.etype, [0, 0, 0])[2] += 1
    precision, recall, f1 = _prf(tp, fp, fn)
    intent_ok = sum(_intent_correct(s.intents, p)
                    for s, p in zip(gold_sentences, pred_intents))
    n = len(gold_sentences)
    return MetricsReport(
        precision=precision, recall=recall, f1=f1,
        intent_accuracy=intent_ok / n if n else 0.0,
        token_accuracy=token_accuracy([s.tags for s in gold_sentences], pred_tags),
        overall_accuracy=overall_accuracy(gold_sentences, pred_tags, pred_intents),
        span_tp=tp, span_fp=fp, span_fn=fn,
        intent_tp=intent_ok, intent_fp=n - intent_ok,
        per_type={k: tuple(_prf(*v)) for k, v in by_type.items()},
    )
