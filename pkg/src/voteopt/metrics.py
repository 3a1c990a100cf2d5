"""Imbalance-aware evaluation metrics.

Balanced accuracy and the macro-averaged precision/recall/F1 family come
from a confusion matrix; the one-vs-rest macro AUPRC integrates each
class's precision-recall curve by the trapezoidal rule over recall.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import PredictionSet, WeightMatrix


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[t, p] = instances of true class t predicted as class p."""

    counts: np.ndarray
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError(f"confusion matrix must be square, got {counts.shape}")
        if counts.min() < 0:
            raise ValueError("confusion matrix entries must be non-negative")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)
        names = tuple(self.class_names) or tuple(
            str(i) for i in range(counts.shape[0])
        )
        if len(names) != counts.shape[0]:
            raise ValueError("class name count does not match matrix size")
        object.__setattr__(self, "class_names", names)

    @classmethod
    def from_predictions(cls, true_idx, pred_idx, m: int, class_names=()):
        true_idx = np.asarray(true_idx, dtype=np.int64)
        pred_idx = np.asarray(pred_idx, dtype=np.int64)
        counts = np.zeros((m, m), dtype=np.int64)
        np.add.at(counts, (true_idx, pred_idx), 1)
        return cls(counts, class_names)

    @property
    def m(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _require_populated(cm: ConfusionMatrix) -> np.ndarray:
    row_sums = cm.counts.sum(axis=1)
    if np.any(row_sums == 0):
        empty = cm.class_names[int(np.argmin(row_sums))]
        raise ValueError(
            f"recall undefined: true class {empty!r} has no instances"
        )
    return row_sums


def balanced_accuracy(cm: ConfusionMatrix) -> float:
    """Unweighted mean of per-class recall."""
    row_sums = _require_populated(cm)
    recalls = np.diag(cm.counts) / row_sums
    return float(recalls.mean())


@dataclass(frozen=True)
class PrfBreakdown:
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    zero_precision_classes: tuple[str, ...]


def per_class_prf(cm: ConfusionMatrix) -> PrfBreakdown:
    """Per-class precision/recall/F1.

    A class that is never predicted has undefined precision; it is scored 0
    and reported in ``zero_precision_classes``.
    """
    row_sums = _require_populated(cm)
    col_sums = cm.counts.sum(axis=0)
    diag = np.diag(cm.counts).astype(np.float64)
    recall = diag / row_sums
    empty_pred = col_sums == 0
    precision = np.divide(
        diag, col_sums, out=np.zeros(cm.m, dtype=np.float64), where=~empty_pred
    )
    pr = precision + recall
    f1 = np.divide(
        2.0 * precision * recall, pr, out=np.zeros(cm.m), where=pr > 0
    )
    flagged = tuple(cm.class_names[j] for j in np.flatnonzero(empty_pred))
    return PrfBreakdown(precision, recall, f1, flagged)


def macro_prf(cm: ConfusionMatrix) -> tuple[float, float, float]:
    """Macro-averaged (precision, recall, F1)."""
    b = per_class_prf(cm)
    return float(b.precision.mean()), float(b.recall.mean()), float(b.f1.mean())


def binary_auprc(scores: np.ndarray, positive: np.ndarray) -> float:
    """Area under the precision-recall curve for one positive class.

    Thresholds sweep the distinct scores from high to low (ties share a
    threshold); the curve is anchored at recall 0 with the precision of the
    top-scored group and integrated trapezoidally over recall. A constant
    score vector therefore yields the positive prevalence.
    """
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive, dtype=bool)
    p_total = int(positive.sum())
    if p_total == 0:
        raise ValueError("binary_auprc requires at least one positive instance")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = positive[order].astype(np.int64)
    # last index of each tied-score group
    boundaries = np.flatnonzero(np.diff(sorted_scores) != 0.0)
    ends = np.append(boundaries, scores.size - 1)
    tp = np.cumsum(sorted_pos)[ends]
    predicted = ends + 1
    recall = tp / p_total
    precision = tp / predicted
    r = np.concatenate(([0.0], recall))
    p = np.concatenate(([precision[0]], precision))
    return float(np.sum(np.diff(r) * (p[:-1] + p[1:]) / 2.0))


def ensemble_scores(preds: PredictionSet, weights: WeightMatrix) -> np.ndarray:
    """Weighted per-class ensemble score for every instance, shape (N, m)."""
    if weights.w.shape != (preds.classifiers.n, preds.classes.m):
        raise ValueError(
            f"weight shape {weights.w.shape} does not match predictions "
            f"({preds.classifiers.n} classifiers, {preds.classes.m} classes)"
        )
    return np.einsum("tij,ij->tj", preds.scores, weights.w)


def auprc_per_class(
    preds: PredictionSet, weights: WeightMatrix
) -> tuple[np.ndarray, tuple[str, ...]]:
    """One-vs-rest AUPRC per class; absent classes are skipped with a warning.

    Returns (values with NaN for skipped classes, skipped class names).
    """
    scores = ensemble_scores(preds, weights)
    m = preds.classes.m
    values = np.full(m, np.nan)
    skipped = []
    for j in range(m):
        pos = preds.true_classes == j
        if not pos.any():
            skipped.append(preds.classes.names[j])
            continue
        values[j] = binary_auprc(scores[:, j], pos)
    if skipped:
        warnings.warn(
            f"classes absent from the truth skipped in AUPRC: {skipped}"
        )
    if len(skipped) == m:
        raise ValueError("no class present in the truth; AUPRC undefined")
    return values, tuple(skipped)


def macro_auprc(preds: PredictionSet, weights: WeightMatrix) -> float:
    """Macro-averaged one-vs-rest AUPRC over the classes present in truth."""
    values, _ = auprc_per_class(preds, weights)
    return float(np.nanmean(values))


def improvement_pct(ours: float, other: float) -> float:
    """Percentage improvement of ``ours`` over ``other``."""
    if other <= 0.0:
        raise ValueError(f"baseline value must be positive, got {other}")
    return 100.0 * (ours - other) / other


@dataclass(frozen=True)
class MetricsReport:
    """Full evaluation of an ensemble on a prediction set."""

    balanced_accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    macro_auprc: float | None
    per_class: dict[str, dict[str, float]] = field(default_factory=dict)
    zero_precision_classes: tuple[str, ...] = ()
    skipped_auprc_classes: tuple[str, ...] = ()
    tie_count: int = 0

    def as_dict(self) -> dict:
        return {
            "balanced_accuracy": self.balanced_accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "macro_auprc": self.macro_auprc,
            "per_class": self.per_class,
            "zero_precision_classes": list(self.zero_precision_classes),
            "skipped_auprc_classes": list(self.skipped_auprc_classes),
            "tie_count": self.tie_count,
        }
