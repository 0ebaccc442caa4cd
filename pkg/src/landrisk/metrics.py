"""Confusion matrices and segmentation metrics.

Every metric is evaluated from integer counts. A per-class value whose
denominator is zero is undefined and reported as ``nan`` (``null`` in JSON);
undefined values are left out of the means.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class MetricsError(ValueError):
    pass


class ConfusionMatrix:
    """``counts[i, j]`` = pixels with ground truth ``i`` predicted as ``j``."""

    def __init__(self, counts):
        counts = np.asarray(counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1] or counts.shape[0] == 0:
            raise MetricsError(f"confusion matrix must be square and non-empty, got {counts.shape}")
        if not np.issubdtype(counts.dtype, np.integer):
            if not np.all(np.mod(counts, 1) == 0):
                raise MetricsError("confusion counts must be integers")
        counts = counts.astype(np.int64)
        if (counts < 0).any():
            raise MetricsError("confusion counts must be nonnegative")
        counts.setflags(write=False)
        self.counts = counts

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def tp(self) -> np.ndarray:
        return np.diag(self.counts).copy()

    @property
    def fn(self) -> np.ndarray:
        return self.counts.sum(axis=1) - self.tp

    @property
    def fp(self) -> np.ndarray:
        return self.counts.sum(axis=0) - self.tp

    def __add__(self, other: ConfusionMatrix) -> ConfusionMatrix:
        if other.n != self.n:
            raise MetricsError(f"cannot add {self.n}x{self.n} and {other.n}x{other.n} matrices")
        return ConfusionMatrix(self.counts + other.counts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.counts, other.counts))

    def __repr__(self) -> str:
        return f"ConfusionMatrix({self.counts.tolist()})"

    def transpose(self) -> ConfusionMatrix:
        return ConfusionMatrix(self.counts.T)


def confusion(pred: np.ndarray, gt: np.ndarray, n: int) -> ConfusionMatrix:
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise MetricsError(f"dimension mismatch: prediction {pred.shape} vs ground truth {gt.shape}")
    for name, arr in (("prediction", pred), ("ground truth", gt)):
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise MetricsError(f"{name} holds id outside [0, {n})")
    flat = gt.astype(np.int64).ravel() * n + pred.astype(np.int64).ravel()
    counts = np.bincount(flat, minlength=n * n).reshape(n, n)
    return ConfusionMatrix(counts)


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.full(num.shape, np.nan)
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    return out


def iou_per_class(cm: ConfusionMatrix) -> np.ndarray:
    """TP / (TP + FP + FN) per class."""
    return _ratio(cm.tp, cm.tp + cm.fp + cm.fn)


def f1_per_class(cm: ConfusionMatrix) -> np.ndarray:
    """2TP / (2TP + FP + FN) per class (the Dice coefficient)."""
    return _ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn)


def _defined_mean(values: np.ndarray) -> float:
    defined = values[~np.isnan(values)]
    if defined.size == 0:
        raise MetricsError("no evaluable class")
    return float(defined.mean())


def mean_iou(cm: ConfusionMatrix) -> float:
    return _defined_mean(iou_per_class(cm))


def mean_f1(cm: ConfusionMatrix) -> float:
    return _defined_mean(f1_per_class(cm))


def pixel_accuracy(cm: ConfusionMatrix) -> float:
    """Trace over total."""
    total = cm.total
    if total == 0:
        raise MetricsError("empty confusion matrix")
    return int(np.trace(cm.counts)) / total


def balanced_accuracy(cm: ConfusionMatrix) -> float:
    """Mean recall over the classes present in the ground truth."""
    return _defined_mean(_ratio(cm.tp, cm.counts.sum(axis=1)))


def coarsen(cm: ConfusionMatrix, grouping, n_groups: int | None = None) -> ConfusionMatrix:
    """Merge classes into groups: ``out[g(i), g(j)] += counts[i, j]``.

    ``grouping`` maps every class id ``0..n-1`` to a group index, as a dict
    or a sequence. ``n_groups`` defaults to ``max(group) + 1``.
    """
    if isinstance(grouping, dict):
        missing = [i for i in range(cm.n) if i not in grouping]
        if missing:
            raise MetricsError(f"grouping is missing class ids {missing}")
        g = np.array([grouping[i] for i in range(cm.n)], dtype=np.int64)
    else:
        g = np.asarray(grouping, dtype=np.int64)
        if g.shape != (cm.n,):
            raise MetricsError(f"grouping covers {g.size} classes, matrix has {cm.n}")
    if (g < 0).any():
        raise MetricsError("group indices must be nonnegative")
    if n_groups is None:
        n_groups = int(g.max()) + 1
    elif g.max() >= n_groups:
        raise MetricsError(f"group index {int(g.max())} >= n_groups={n_groups}")
    out = np.zeros((n_groups, n_groups), dtype=np.int64)
    np.add.at(out, (g[:, None], g[None, :]), cm.counts)
    return ConfusionMatrix(out)


def row_normalize(cm: ConfusionMatrix) -> np.ndarray:
    """Row percentages as fractions; empty rows stay all-zero."""
    rows = cm.counts.sum(axis=1, keepdims=True)
    out = np.zeros(cm.counts.shape, dtype=np.float64)
    np.divide(cm.counts, rows, out=out, where=rows > 0)
    return out


def _nan_to_none(values) -> list:
    return [None if math.isnan(v) else float(v) for v in values]


@dataclass
class MetricsReport:
    per_class_iou: np.ndarray
    mean_iou: float
    per_class_f1: np.ndarray
    mean_f1: float
    pixel_accuracy: float
    balanced_accuracy: float
    n_classes: int
    confusion: ConfusionMatrix = field(repr=False)

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix) -> MetricsReport:
        return cls(
            per_class_iou=iou_per_class(cm),
            mean_iou=mean_iou(cm),
            per_class_f1=f1_per_class(cm),
            mean_f1=mean_f1(cm),
            pixel_accuracy=pixel_accuracy(cm),
            balanced_accuracy=balanced_accuracy(cm),
            n_classes=cm.n,
            confusion=cm,
        )

    def to_dict(self) -> dict:
        return {
            "per_class_iou": _nan_to_none(self.per_class_iou),
            "mean_iou": self.mean_iou,
            "per_class_f1": _nan_to_none(self.per_class_f1),
            "mean_f1": self.mean_f1,
            "pixel_accuracy": self.pixel_accuracy,
            "balanced_accuracy": self.balanced_accuracy,
            "confusion": self.confusion.counts.tolist(),
            "n_classes": self.n_classes,
        }
