"""Linear soft-margin SVM (hinge loss + L2) fitted by Pegasos-style subgradient steps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True, eq=False)
class SvmModel:
    weights: np.ndarray
    bias: float
    lam: float
    iterations: int
    # set when the training labels were all one class
    constant_label: int | None = None
    # per-feature standardization fitted on the training rows
    center: np.ndarray | None = None
    scale: np.ndarray | None = None

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        if self.center is None:
            return X
        return (X - self.center) / self.scale

    def decision_function(self, X):
        return self.transform(X) @ self.weights + self.bias

    def predict(self, X):
        """Labels in {0, 1}; a zero margin predicts 1."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.constant_label is not None:
            return np.full(X.shape[0], self.constant_label, dtype=np.int64)
        return (self.decision_function(X) >= 0).astype(np.int64)


@njit(cache=True)
def _pegasos(X, y, order, lam):
    n_passes, m = order.shape
    d = X.shape[1]
    w = np.zeros(d)
    t = 0
    for p in range(n_passes):
        for k in range(m):
            i = order[p, k]
            t += 1
            eta = 1.0 / (lam * t)
            margin = 0.0
            for j in range(d):
                margin += w[j] * X[i, j]
            margin *= y[i]
            shrink = 1.0 - eta * lam
            if margin < 1.0:
                for j in range(d):
                    w[j] = shrink * w[j] + eta * y[i] * X[i, j]
            else:
                for j in range(d):
                    w[j] = shrink * w[j]
    return w


def fit_linear_svm(X, y, lam=0.01, passes=200, seed=0, standardize=True) -> SvmModel:
    """Fit on rows ``X`` with labels ``y`` in {0, 1}.

    With ``standardize`` each column is centred and scaled by its standard
    deviation over ``X`` (constant columns are only centred), which keeps the
    fixed ``lam`` meaningful whatever the input units. The bias is learned as
    the weight of an appended constant feature, so it is regularized together
    with the other weights. Each pass visits the rows in a fresh seeded order
    with step size 1/(lam * t).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=np.int64)
    m = X.shape[0]
    if m == 0:
        raise ValueError("cannot fit an SVM on zero rows")
    if np.all(y == y[0]):
        return SvmModel(np.zeros(X.shape[1]), 0.0, lam, 0, constant_label=int(y[0]))

    center = scale = None
    if standardize:
        center = X.mean(axis=0)
        sd = X.std(axis=0)
        scale = np.where(sd > 0, sd, 1.0)
        X = (X - center) / scale
    Xa = np.hstack([X, np.ones((m, 1))])
    ys = np.where(y == 1, 1.0, -1.0)
    rng = np.random.default_rng(seed)
    order = rng.permuted(np.tile(np.arange(m), (passes, 1)), axis=1)
    w = _pegasos(Xa, ys, order, float(lam))
    return SvmModel(w[:-1].copy(), float(w[-1]), lam, passes * m,
                    center=center, scale=scale)
