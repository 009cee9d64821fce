"""Confusion matrix and macro-averaged scores.

Undefined per-class precision or recall (empty column or row) counts as 0,
and macro values average over all four classes whether or not they occur.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .data import N_CLASSES, RiskLabel
from .errors import EmptyInput, EmptyMatrix, LengthMismatch


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    counts: np.ndarray  # rows = true label, columns = predicted label

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_list(self):
        return self.counts.tolist()


def _as_codes(labels):
    return np.array([int(RiskLabel.coerce(v)) if not isinstance(v, (int, np.integer)) else int(v)
                     for v in labels], dtype=np.int64)


def confusion(y_true, y_pred) -> ConfusionMatrix:
    t = _as_codes(y_true)
    p = _as_codes(y_pred)
    if t.shape != p.shape:
        raise LengthMismatch(f"{t.size} true labels vs {p.size} predictions")
    if t.size == 0:
        raise EmptyInput("confusion matrix of zero samples")
    if t.min() < 0 or p.min() < 0 or t.max() >= N_CLASSES or p.max() >= N_CLASSES:
        raise ValueError("labels must lie in 0..3")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts)


def _safe_div(num, den):
    return np.divide(num, den, out=np.zeros(num.shape, dtype=np.float64), where=den > 0)


@dataclass(frozen=True, eq=False)
class MetricsReport:
    accuracy: float
    macro_recall: float
    macro_precision: float
    macro_f1: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    n_evaluated: int
    confusion: ConfusionMatrix

    def percentages(self) -> dict:
        return {k: 100.0 * getattr(self, k) for k in ("accuracy", "macro_recall", "macro_precision", "macro_f1")}

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_recall": self.macro_recall,
            "macro_precision": self.macro_precision,
            "macro_f1": self.macro_f1,
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
            "f1": self.f1.tolist(),
            "n_evaluated": self.n_evaluated,
            "confusion": self.confusion.to_list(),
        }

    @classmethod
    def from_dict(cls, d) -> "MetricsReport":
        return summarize(ConfusionMatrix(np.array(d["confusion"], dtype=np.int64)))


def summarize(cm: ConfusionMatrix) -> MetricsReport:
    c = np.asarray(cm.counts, dtype=np.int64)
    total = c.sum()
    if total <= 0:
        raise EmptyMatrix("cannot summarize an empty confusion matrix")
    diag = np.diag(c).astype(np.float64)
    precision = _safe_div(diag, c.sum(axis=0).astype(np.float64))
    recall = _safe_div(diag, c.sum(axis=1).astype(np.float64))
    f1 = _safe_div(2.0 * precision * recall, precision + recall)
    return MetricsReport(
        accuracy=float(diag.sum() / total),
        macro_recall=float(recall.mean()),
        macro_precision=float(precision.mean()),
        macro_f1=float(f1.mean()),
        precision=precision,
        recall=recall,
        f1=f1,
        n_evaluated=int(total),
        confusion=ConfusionMatrix(c),
    )


def evaluate(y_true, y_pred) -> MetricsReport:
    return summarize(confusion(y_true, y_pred))


def pct(value: float, places: int = 2) -> str:
    """Format a fraction as a percentage, rounding half up (``0.060484 -> '6.05'``)."""
    q = Decimal(1).scaleb(-places)
    return str((Decimal(repr(float(value))) * 100).quantize(q, rounding=ROUND_HALF_UP))
