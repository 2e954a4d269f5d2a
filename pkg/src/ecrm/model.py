"""Training and conditional-risk estimation.

Fitting stores the inputs, the structured labels and a Cholesky factor of
``K + m*lambda*I``.  A query ``x`` yields a weight vector
``w(x) = (K + m*lambda*I)^-1 v(x)`` and the estimated conditional risk of a
candidate label ``y`` is the weighted sum ``sum_i w_i(x) loss(y, y_i)``.

Fitting never touches the label contents: the label array is stored as
passed, so training cost is independent of the output dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NumericalError
from .kernels import KernelSpec, gram_matrix, kernel_vector
from .losses import LossSpec, loss_value

INTERCEPT_MODES = ("none", "centered")


@dataclass(frozen=True)
class WeightVector:
    """Solution of ``(K + m*lambda*I) w = v(x)`` for one query.

    ``adjustment`` is the per-sample constant added when the model was fit
    with a centered intercept; ``effective`` is what risk estimates use.
    """

    w: np.ndarray
    query: np.ndarray
    adjustment: float = 0.0

    @property
    def effective(self) -> np.ndarray:
        if self.adjustment == 0.0:
            return self.w
        return self.w + self.adjustment


@dataclass(frozen=True)
class TrainedModel:
    kernel: KernelSpec
    lam: float
    inputs: np.ndarray
    labels: np.ndarray
    intercept_mode: str = "none"
    factor: tuple = field(repr=False, compare=False, default=None)

    @property
    def m(self) -> int:
        return self.inputs.shape[0]

    @property
    def p(self) -> int:
        return self.inputs.shape[1]


def fit(spec: KernelSpec, lam: float, X, Y, intercept_mode: str = "none") -> TrainedModel:
    """Fit the risk estimator: build the Gram matrix and factor ``K + m*lambda*I``.

    Raises NumericalError when the regularized Gram matrix cannot be
    factored even after a single jitter retry.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if intercept_mode not in INTERCEPT_MODES:
        raise ValueError(f"intercept_mode must be one of {INTERCEPT_MODES}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.asarray(Y)
    m = X.shape[0]
    if Y.shape[0] != m:
        raise ValueError(f"inputs have {m} rows but labels have {Y.shape[0]}")
    K = gram_matrix(spec, X)
    A = K + (m * lam) * np.eye(m)
    try:
        factor = cho_factor(A, lower=True)
    except np.linalg.LinAlgError:
        # One jitter retry scaled to the mean diagonal mass, then give up.
        jitter = 1e-10 * float(np.trace(K)) / m
        try:
            factor = cho_factor(A + jitter * np.eye(m), lower=True)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                "Cholesky factorization of K + m*lambda*I failed; the Gram matrix "
                "is numerically non-positive-definite"
            ) from exc
    return TrainedModel(kernel=spec, lam=lam, inputs=X, labels=Y,
                        intercept_mode=intercept_mode, factor=factor)


def weights(model: TrainedModel, x) -> WeightVector:
    """Weight vector for a query point.

    With a centered intercept the per-target mean is subtracted before the
    ridge solve and added back afterwards; folding that through the weighted
    sum is equivalent to adding ``(1 - sum(w)) / m`` to every weight.
    """
    if model.factor is None:
        raise ValueError("model has no stored factorization; was it fitted?")
    v = kernel_vector(model.kernel, model.inputs, x)
    w = cho_solve(model.factor, v)
    adj = 0.0
    if model.intercept_mode == "centered":
        adj = (1.0 - float(np.sum(w))) / model.m
    return WeightVector(w=w, query=np.asarray(x, dtype=float), adjustment=adj)


def estimate_conditional_risk(model: TrainedModel, loss: LossSpec, y, x) -> float:
    """Estimated conditional risk of predicting ``y`` at input ``x``."""
    wv = weights(model, x)
    return risk_from_weights(wv.effective, model.labels, loss, y)


def risk_from_weights(w, labels, loss: LossSpec, y) -> float:
    """Weighted sum of losses of ``y`` against each stored label."""
    w = np.asarray(w, dtype=float)
    vals = np.array([loss_value(loss, y, labels[i]) for i in range(len(labels))])
    return float(np.dot(w, vals))
