"""Linear soft-margin SVM trained by dual coordinate descent.

The bias is handled as an extra constant feature, which turns the dual into
a box-constrained problem that single coordinates can be optimized over.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import sparse

from ..errors import NonFiniteFeature, SingleClassInput

DEFAULT_C = 1.0
DEFAULT_TOL = 1e-3
DEFAULT_MAX_ITER = 1000
# recorded for provenance only; the linear kernel has no gamma
GAMMA = 0.1


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    C: float
    iterations: int = 0
    dual_objective: float = 0.0
    primal_objective: float = 0.0
    converged: bool = True
    alpha: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X @ self.weights).ravel() + self.bias

    def __eq__(self, other):
        return (
            isinstance(other, LinearModel)
            and np.array_equal(self.weights, other.weights)
            and self.bias == other.bias
            and self.C == other.C
        )

    __hash__ = None


@njit(cache=True)
def _sweep(indptr, indices, data, y, alpha, w, qd, C, order):
    """One pass of coordinate updates; returns the largest projected gradient seen."""
    bias_slot = w.shape[0] - 1
    worst = 0.0
    for i in order:
        start, stop = indptr[i], indptr[i + 1]
        margin = w[bias_slot]
        for p in range(start, stop):
            margin += w[indices[p]] * data[p]
        g = y[i] * margin - 1.0
        a = alpha[i]
        if a <= 0.0:
            pg = min(g, 0.0)
        elif a >= C:
            pg = max(g, 0.0)
        else:
            pg = g
        if abs(pg) > worst:
            worst = abs(pg)
        if pg != 0.0:
            new = min(max(a - g / qd[i], 0.0), C)
            step = (new - a) * y[i]
            alpha[i] = new
            for p in range(start, stop):
                w[indices[p]] += step * data[p]
            w[bias_slot] += step
    return worst


def _as_csr(X) -> sparse.csr_matrix:
    X = sparse.csr_matrix(X, dtype=np.float64)
    X.sort_indices()
    if not np.all(np.isfinite(X.data)):
        raise NonFiniteFeature("feature matrix contains NaN or infinity")
    return X


def objectives(X, y, w_aug, alpha, C) -> tuple[float, float]:
    """(primal, dual) of the bias-augmented problem."""
    X = sparse.csr_matrix(X)
    sq = float(w_aug @ w_aug)
    margins = y * (np.asarray(X @ w_aug[:-1]).ravel() + w_aug[-1])
    primal = 0.5 * sq + C * float(np.maximum(0.0, 1.0 - margins).sum())
    dual = float(alpha.sum()) - 0.5 * sq
    return primal, dual


def train_binary(X, y, C: float = DEFAULT_C, tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER, seed: int = 0) -> LinearModel:
    """Fit a binary linear SVM; ``y`` holds -1/+1 labels.

    Coordinates are visited in a fresh permutation each sweep, drawn from a
    generator seeded with ``seed``. The reported bias averages y_i - w.x_i over
    free support vectors (0 < alpha_i < C), falling back to the dual's own
    bias component when there are none.
    """
    X = _as_csr(X)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    if y.shape != (n,):
        raise ValueError("label vector length differs from row count")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if n < 2 or not (np.any(y > 0) and np.any(y < 0)):
        raise SingleClassInput("binary training needs both labels present")
    if not C > 0:
        raise ValueError("C must be positive")

    qd = np.asarray(X.multiply(X).sum(axis=1)).ravel() + 1.0
    alpha = np.zeros(n)
    w = np.zeros(d + 1)
    rng = np.random.default_rng(seed)
    converged = False
    sweeps = 0
    while sweeps < max_iter:
        sweeps += 1
        order = rng.permutation(n)
        if _sweep(X.indptr, X.indices, X.data, y, alpha, w, qd, C, order) <= tol:
            converged = True
            break

    free = (alpha > 0.0) & (alpha < C)
    weights = w[:-1].copy()
    if np.any(free):
        bias = float(np.mean(y[free] - np.asarray(X[free] @ weights).ravel()))
    else:
        bias = float(w[-1])
    primal, dual = objectives(X, y, w, alpha, C)
    return LinearModel(weights, bias, float(C), sweeps, dual, primal, converged, alpha)
