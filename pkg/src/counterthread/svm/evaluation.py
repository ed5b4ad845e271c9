"""Stratified folds, confusion-matrix metrics and cross-validation."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ..errors import LengthMismatch, TooFewSamples
from ..labels import N_CLASSES


def kfold_stratified(labels: Sequence[int], k: int = 10, seed: int = 42) -> list[np.ndarray]:
    """Disjoint sorted index folds with per-class counts balanced to within one.

    Each class is shuffled, then dealt round-robin; the dealing position carries
    over from one class to the next so fold sizes also stay within one.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise TooFewSamples(f"{n} samples cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    pointer = 0
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        for idx in rng.permutation(members):
            folds[pointer].append(int(idx))
            pointer = (pointer + 1) % k
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


@dataclass(frozen=True)
class EvalReport:
    confusion: np.ndarray  # rows gold, columns predicted
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    support: tuple[int, ...]
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    accuracy: float

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    def as_dict(self) -> dict:
        return {
            "confusion": self.confusion.tolist(),
            "precision": list(self.precision),
            "recall": list(self.recall),
            "f1": list(self.f1),
            "support": list(self.support),
            "weighted_precision": self.weighted_precision,
            "weighted_recall": self.weighted_recall,
            "weighted_f1": self.weighted_f1,
            "accuracy": self.accuracy,
        }


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def report_from_confusion(confusion) -> EvalReport:
    """Metrics computed in exact rationals, rounded to float once at the end."""
    cm = np.asarray(confusion, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or np.any(cm < 0):
        raise ValueError("confusion matrix must be square and non-negative")
    rows = cm.sum(axis=1)
    cols = cm.sum(axis=0)
    total = int(cm.sum())
    P, R, F = [], [], []
    for c in range(cm.shape[0]):
        tp = int(cm[c, c])
        p = _ratio(tp, int(cols[c]))
        r = _ratio(tp, int(rows[c]))
        P.append(p)
        R.append(r)
        F.append(2 * p * r / (p + r) if p + r else Fraction(0))
    weights = [_ratio(int(s), total) for s in rows]
    wp = sum((w * p for w, p in zip(weights, P)), Fraction(0))
    wr = sum((w * r for w, r in zip(weights, R)), Fraction(0))
    wf = sum((w * f for w, f in zip(weights, F)), Fraction(0))
    acc = _ratio(int(np.trace(cm)), total)
    # weighted recall is algebraically the accuracy; with exact arithmetic it is equal
    assert wr == acc
    return EvalReport(
        cm,
        tuple(float(x) for x in P),
        tuple(float(x) for x in R),
        tuple(float(x) for x in F),
        tuple(int(s) for s in rows),
        float(wp), float(wr), float(wf), float(acc),
    )


def confusion_matrix(gold, predicted, n_classes: int = N_CLASSES) -> np.ndarray:
    gold = np.asarray(gold, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if gold.shape != predicted.shape:
        raise LengthMismatch(f"{gold.shape[0]} gold labels vs {predicted.shape[0]} predictions")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (gold, predicted), 1)
    return cm


def evaluate(gold, predicted, n_classes: int = N_CLASSES) -> EvalReport:
    return report_from_confusion(confusion_matrix(gold, predicted, n_classes))


FitPredict = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CvResult:
    report: EvalReport
    predictions: np.ndarray
    folds: tuple[np.ndarray, ...]
    fold_reports: tuple[EvalReport, ...]


def cross_validate(labels, fit_predict: FitPredict, k: int = 10, seed: int = 42) -> CvResult:
    """Run ``fit_predict(train_idx, test_idx)`` per fold and pool the predictions.

    Folds are processed and merged in index order, so results do not depend on
    how a caller might schedule them.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if k < 2:
        raise ValueError("cross-validation needs k >= 2")
    folds = kfold_stratified(labels, k, seed)
    predictions = np.full(labels.shape[0], -1, dtype=np.int64)
    all_idx = np.arange(labels.shape[0])
    fold_reports = []
    for test in folds:
        train = np.setdiff1d(all_idx, test, assume_unique=True)
        pred = np.asarray(fit_predict(train, test), dtype=np.int64)
        if pred.shape != test.shape:
            raise LengthMismatch("fit_predict returned the wrong number of predictions")
        predictions[test] = pred
        fold_reports.append(evaluate(labels[test], pred))
    return CvResult(evaluate(labels, predictions), predictions, tuple(folds), tuple(fold_reports))
