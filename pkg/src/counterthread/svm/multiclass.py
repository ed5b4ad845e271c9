"""One-vs-rest wrapper over the binary trainer, with shared scaling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, SingleClassInput
from ..labels import N_CLASSES, ConflatedClass
from .linear import DEFAULT_C, DEFAULT_MAX_ITER, DEFAULT_TOL, LinearModel, train_binary
from .scaling import ScalingParams, apply_scaling, fit_scaling


@dataclass(frozen=True)
class MulticlassModel:
    # None marks a class absent from training; it never wins the argmax
    models: tuple[LinearModel | None, ...]
    scaling: ScalingParams

    def __post_init__(self):
        if len(self.models) != N_CLASSES:
            raise ValueError(f"expected {N_CLASSES} binary models")
        for m in self.models:
            if m is not None and m.dim != self.scaling.dim:
                raise ValueError("binary model dimension differs from scaling")

    @property
    def dim(self) -> int:
        return self.scaling.dim

    def decision_values(self, X) -> np.ndarray:
        """Per-class scores on raw (unscaled) features, shape (n, 4)."""
        if X.shape[-1] != self.dim:
            raise DimensionMismatch(f"model expects {self.dim} features, got {X.shape[-1]}")
        Xs = apply_scaling(self.scaling, X)
        if Xs.ndim == 1:
            Xs = Xs.reshape(1, -1)
        out = np.full((Xs.shape[0], N_CLASSES), -np.inf)
        for c, m in enumerate(self.models):
            if m is not None:
                out[:, c] = m.decision_function(Xs)
        return out


def argmax_lowest(scores: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. the lowest class code
    return np.argmax(scores, axis=1)


def train_ovr(X, labels, C: float = DEFAULT_C, tol: float = DEFAULT_TOL,
              max_iter: int = DEFAULT_MAX_ITER, seed: int = 0) -> MulticlassModel:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != X.shape[0]:
        raise ValueError("label count differs from row count")
    if np.any((labels < 0) | (labels >= N_CLASSES)):
        raise ValueError("labels must be conflated class codes 0..3")
    present = np.unique(labels)
    if present.size < 2:
        raise SingleClassInput("one-vs-rest training needs at least two classes")
    scaling = fit_scaling(X)
    Xs = apply_scaling(scaling, X)
    models = []
    for c in range(N_CLASSES):
        if c not in present:
            models.append(None)
            continue
        y = np.where(labels == c, 1.0, -1.0)
        models.append(train_binary(Xs, y, C=C, tol=tol, max_iter=max_iter, seed=seed + c))
    return MulticlassModel(tuple(models), scaling)


def predict(model: MulticlassModel, X) -> np.ndarray:
    """Class codes per row; a 1-D input gives a length-1 array."""
    return argmax_lowest(model.decision_values(X))


def predict_one(model: MulticlassModel, x) -> ConflatedClass:
    return ConflatedClass(int(predict(model, x)[0]))
