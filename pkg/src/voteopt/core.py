"""Shared domain types for the ensemble weighting toolkit.

Conventions used throughout the package:

* matrices are addressed (classifier row, class column);
* accuracies and weights are dimensionless reals in [0, 1];
* all types are immutable after construction and safe to share across
  workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NORMAL = "normal"
ABNORMAL = "abnormal"


class UndefinedRatioError(ValueError):
    """Imbalance ratio requested for a distribution with an empty class."""


def _frozen_array(values, dtype=np.float64, ndim=None) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


def _check_unique(names: Sequence[str], what: str) -> None:
    if len(names) == 0:
        raise ValueError(f"{what} names must be non-empty")
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate {what} names: {sorted(names)}")


@dataclass(frozen=True)
class ClassifierSet:
    """Ordered classifier identifiers; the canonical row order for matrices."""

    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        _check_unique(self.names, "classifier")

    @property
    def n(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)


@dataclass(frozen=True)
class ClassSet:
    """Ordered class identifiers, each tagged normal or abnormal.

    The tag partitions the classes (normal activity vs rare events); it is
    descriptive metadata and does not affect weight computation.
    """

    names: tuple[str, ...]
    kinds: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        _check_unique(self.names, "class")
        kinds = tuple(self.kinds) if self.kinds else (ABNORMAL,) * len(self.names)
        if len(kinds) != len(self.names):
            raise ValueError("kinds must match names length")
        for k in kinds:
            if k not in (NORMAL, ABNORMAL):
                raise ValueError(f"class kind must be '{NORMAL}' or '{ABNORMAL}', got {k!r}")
        object.__setattr__(self, "kinds", kinds)

    @property
    def m(self) -> int:
        return len(self.names)

    @property
    def normal(self) -> tuple[str, ...]:
        return tuple(n for n, k in zip(self.names, self.kinds) if k == NORMAL)

    @property
    def abnormal(self) -> tuple[str, ...]:
        return tuple(n for n, k in zip(self.names, self.kinds) if k == ABNORMAL)

    def index(self, name: str) -> int:
        return self.names.index(name)


@dataclass(frozen=True)
class AccuracyMatrix:
    """Mean validation accuracy per (classifier, class) pair."""

    values: np.ndarray
    classifiers: ClassifierSet
    classes: ClassSet

    def __post_init__(self):
        values = _frozen_array(self.values, ndim=2)
        object.__setattr__(self, "values", values)
        n, m = values.shape
        if n != self.classifiers.n or m != self.classes.m:
            raise ValueError(
                f"matrix shape {values.shape} does not match "
                f"{self.classifiers.n} classifiers x {self.classes.m} classes"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("accuracy matrix contains non-finite entries")
        if values.min() < 0.0 or values.max() > 1.0:
            i, j = np.unravel_index(
                np.argmax(np.abs(values - 0.5)), values.shape
            )
            raise ValueError(
                f"accuracy out of [0, 1] at "
                f"({self.classifiers.names[i]}, {self.classes.names[j]}): "
                f"{values[i, j]}"
            )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class HyperParams:
    """Knobs of the weighting model.

    ``epsilon`` must stay well below the unit-scaled accuracies and weights,
    ``big_m`` well above them; the defaults separate cleanly for any
    realistic class count.
    """

    k: int
    lam: float = 0.95
    alpha: float = 0.85
    epsilon: float = 1e-6
    big_m: float = 1e6

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"ensemble size k must be >= 1, got {self.k}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 < self.epsilon <= 1e-3:
            raise ValueError(f"epsilon must be in (0, 1e-3], got {self.epsilon}")
        if self.big_m < 1e3:
            raise ValueError(f"big_m must be >= 1e3, got {self.big_m}")

    @property
    def l2_coeff(self) -> float:
        """Effective quadratic penalty coefficient lam * (1 - alpha)."""
        return self.lam * (1.0 - self.alpha)


@dataclass(frozen=True)
class SelectionVector:
    """Binary per-classifier selection flags."""

    x: np.ndarray

    def __post_init__(self):
        x = _frozen_array(self.x, dtype=np.int64, ndim=1)
        if not np.all((x == 0) | (x == 1)):
            raise ValueError("selection flags must be 0 or 1")
        object.__setattr__(self, "x", x)

    @classmethod
    def from_indices(cls, indices: Iterable[int], n: int) -> "SelectionVector":
        x = np.zeros(n, dtype=np.int64)
        x[list(indices)] = 1
        return cls(x)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.x))

    @property
    def count(self) -> int:
        return int(self.x.sum())


@dataclass(frozen=True)
class WeightMatrix:
    """Non-negative weight per (classifier, class) pair.

    Column/overall mass conventions vary by weighting scheme; argmax voting
    is invariant to a single global scale, so mixed conventions are safe.
    """

    w: np.ndarray

    def __post_init__(self):
        w = _frozen_array(self.w, ndim=2)
        if not np.all(np.isfinite(w)):
            raise ValueError("weight matrix contains non-finite entries")
        if w.min() < 0.0:
            i, j = np.unravel_index(np.argmin(w), w.shape)
            raise ValueError(f"negative weight at ({i}, {j}): {w[i, j]}")
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    @property
    def m(self) -> int:
        return self.w.shape[1]


@dataclass(frozen=True)
class PredictionSet:
    """Per-instance truth plus per-classifier per-class scores.

    ``scores`` has shape (instances, classifiers, classes); hard votes are
    represented as one-hot score rows.
    """

    instance_ids: tuple[str, ...]
    true_classes: np.ndarray
    scores: np.ndarray
    classifiers: ClassifierSet
    classes: ClassSet

    def __post_init__(self):
        object.__setattr__(self, "instance_ids", tuple(self.instance_ids))
        truth = _frozen_array(self.true_classes, dtype=np.int64, ndim=1)
        scores = _frozen_array(self.scores, ndim=3)
        if scores.shape != (len(self.instance_ids), self.classifiers.n, self.classes.m):
            raise ValueError(
                f"scores shape {scores.shape} does not match "
                f"({len(self.instance_ids)}, {self.classifiers.n}, {self.classes.m})"
            )
        if truth.shape[0] != len(self.instance_ids):
            raise ValueError("true_classes length does not match instance count")
        if truth.size and (truth.min() < 0 or truth.max() >= self.classes.m):
            raise ValueError("true class index out of range")
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores contain non-finite entries")
        object.__setattr__(self, "true_classes", truth)
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return len(self.instance_ids)


@dataclass(frozen=True)
class ClassDistribution:
    """Per-class instance counts."""

    class_names: tuple[str, ...]
    counts: np.ndarray
    kinds: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "class_names", tuple(self.class_names))
        counts = _frozen_array(self.counts, dtype=np.int64, ndim=1)
        _check_unique(self.class_names, "class")
        if counts.shape[0] != len(self.class_names):
            raise ValueError("counts length does not match class names")
        if counts.min() < 0:
            raise ValueError("counts must be non-negative")
        if counts.sum() <= 0:
            raise ValueError("distribution must contain at least one instance")
        object.__setattr__(self, "counts", counts)
        kinds = tuple(self.kinds) if self.kinds else (ABNORMAL,) * len(self.class_names)
        if len(kinds) != len(self.class_names):
            raise ValueError("kinds must match class names length")
        object.__setattr__(self, "kinds", kinds)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def m(self) -> int:
        return len(self.class_names)


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """Regularized objective split into its accuracy and penalty parts."""

    accuracy_term: float
    l1_term: float
    l2_term: float
    total: float


def objective_value(
    v: AccuracyMatrix, weights: WeightMatrix, params: HyperParams
) -> ObjectiveBreakdown:
    """Evaluate the regularized ensemble-accuracy objective.

    accuracy_term is the class-averaged weighted accuracy; the elastic-net
    penalty mixes the weight sum (L1) and squared sum (L2) by ``alpha`` and
    scales by ``lam``.
    """
    if v.values.shape != weights.w.shape:
        raise ValueError(
            f"shape mismatch: accuracies {v.values.shape} vs weights {weights.w.shape}"
        )
    m = v.m
    accuracy = float((v.values * weights.w).sum() / m)
    l1 = float(weights.w.sum())
    l2 = float((weights.w * weights.w).sum())
    total = accuracy - params.lam * (
        params.alpha * l1 + (1.0 - params.alpha) / 2.0 * l2
    )
    return ObjectiveBreakdown(accuracy, l1, l2, total)


def imbalance_ratio(dist: ClassDistribution) -> float:
    """Majority-class count over minority-class count."""
    counts = dist.counts
    if counts.min() == 0:
        empty = dist.class_names[int(np.argmin(counts))]
        raise UndefinedRatioError(
            f"imbalance ratio undefined: class {empty!r} has zero instances"
        )
    return float(counts.max()) / float(counts.min())
