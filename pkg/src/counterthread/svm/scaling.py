"""Per-feature min-max scaling fitted on training rows only."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import DimensionMismatch, EmptyInput


@dataclass(frozen=True)
class ScalingParams:
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        if self.mins.shape != self.maxs.shape:
            raise ValueError("mins and maxs differ in shape")
        if np.any(self.mins > self.maxs):
            raise ValueError("min exceeds max")

    @property
    def dim(self) -> int:
        return self.mins.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, ScalingParams)
            and np.array_equal(self.mins, other.mins)
            and np.array_equal(self.maxs, other.maxs)
        )

    __hash__ = None


def fit_scaling(X) -> ScalingParams:
    if X.shape[0] == 0:
        raise EmptyInput("cannot fit scaling on zero rows")
    if sparse.issparse(X):
        mins = np.asarray(X.min(axis=0).todense(), dtype=np.float64).ravel()
        maxs = np.asarray(X.max(axis=0).todense(), dtype=np.float64).ravel()
    else:
        X = np.asarray(X, dtype=np.float64)
        mins, maxs = X.min(axis=0), X.max(axis=0)
    return ScalingParams(mins, maxs)


def _scale_dense(params: ScalingParams, X: np.ndarray) -> np.ndarray:
    span = params.maxs - params.mins
    safe = np.where(span > 0, span, 1.0)
    out = np.clip((X - params.mins) / safe, 0.0, 1.0)
    out[:, span <= 0] = 0.0
    return out


def apply_scaling(params: ScalingParams, X):
    """Map each column to [0, 1] by the training range, clamping out-of-range values.

    Constant training columns map to 0. Sparse input stays sparse when every
    training minimum is >= 0, since implicit zeros then map to 0.
    """
    if not sparse.issparse(X) and np.ndim(X) == 1:
        return apply_scaling(params, np.reshape(X, (1, -1)))[0]
    if X.shape[1] != params.dim:
        raise DimensionMismatch(f"expected {params.dim} features, got {X.shape[1]}")
    if not sparse.issparse(X):
        return _scale_dense(params, np.asarray(X, dtype=np.float64))
    if np.any(params.mins < 0):
        return sparse.csr_matrix(_scale_dense(params, X.toarray()))
    X = sparse.csr_matrix(X, dtype=np.float64, copy=True)
    span = params.maxs - params.mins
    cols = X.indices
    safe = np.where(span > 0, span, 1.0)
    vals = np.clip((X.data - params.mins[cols]) / safe[cols], 0.0, 1.0)
    vals[span[cols] <= 0] = 0.0
    X.data = vals
    X.eliminate_zeros()
    return X
