"""Linear SVM trained by deterministic seeded stochastic subgradient
descent on the hinge objective (1/2)||w||^2 + C * sum hinge, with averaged
iterates (Pegasos-style steps, lambda = 1/(n*C)).

Features are standardized internally with population statistics. The
intercept rides as an appended constant column, so it shares the
regularizer; sampling draws a uniform u and takes floor(u*n), which keeps
the visited row sequence aligned under dataset duplication.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..seeding import SVM_STREAM, rng_for


@dataclass
class LinearSvmModel:
    weights: np.ndarray        # over standardized features
    intercept: float
    C: float
    epochs: int
    seed: int
    means: np.ndarray
    stds: np.ndarray
    objective_trace: list[float] = field(default_factory=list)
    column_names: list[str] | None = field(default=None, repr=False)


def hinge_objective(Z, y_pm, w_aug, C) -> float:
    margins = 1.0 - y_pm * (Z @ w_aug)
    return 0.5 * float(w_aug @ w_aug) + C * float(np.maximum(margins, 0.0).sum())


def fit_linear_svm(
    X,
    y,
    C: float,
    epochs: int = 5,
    seed: int = 0,
    column_names: list[str] | None = None,
) -> LinearSvmModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if C <= 0:
        raise ValueError("C must be positive")
    if y.min() == y.max():
        raise ValueError("training data contains a single class")
    n, d = X.shape
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds = np.where(stds > 0.0, stds, 1.0)
    Z = np.ones((n, d + 1))
    Z[:, :d] = (X - means) / stds
    y_pm = np.where(y == 1, 1.0, -1.0)

    lam = 1.0 / (n * C)
    rng = rng_for(seed, SVM_STREAM)
    w = np.zeros(d + 1)
    w_avg = np.zeros(d + 1)
    trace: list[float] = []
    t = 0
    for _ in range(epochs):
        for _ in range(n):
            t += 1
            i = int(rng.random() * n)
            z = Z[i]
            eta = 1.0 / (lam * t)
            hit = y_pm[i] * (z @ w) < 1.0
            w *= 1.0 - 1.0 / t
            if hit:
                w += eta * y_pm[i] * z
            w_avg += (w - w_avg) / t
        trace.append(hinge_objective(Z, y_pm, w_avg, C))
    return LinearSvmModel(
        weights=w_avg[:d].copy(),
        intercept=float(w_avg[d]),
        C=C,
        epochs=epochs,
        seed=seed,
        means=means,
        stds=stds,
        objective_trace=trace,
        column_names=column_names,
    )


def svm_decision_scores(model: LinearSvmModel, X) -> np.ndarray:
    """Raw margins; rank-based metrics consume these directly."""
    X = np.asarray(X, dtype=np.float64)
    Z = (X - model.means) / model.stds
    return Z @ model.weights + model.intercept
