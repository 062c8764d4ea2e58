"""L2-penalized logistic regression fit by gradient descent with
backtracking line search, so the penalized negative log-likelihood
decreases at every accepted step. The intercept is not penalized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class LogisticModel:
    weights: np.ndarray
    intercept: float
    l2_penalty: float
    converged: bool
    n_iter: int
    final_nll: float
    column_names: list[str] | None = field(default=None, repr=False)


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def penalized_nll(X, y, weights, intercept, l2_penalty) -> float:
    """Negative Bernoulli log-likelihood plus (l2/2)||w||^2, computed in a
    saturation-safe form."""
    z = X @ weights + intercept
    # log(1 + exp(z)) - y*z, stable for large |z|
    nll = float(np.sum(np.logaddexp(0.0, z) - y * z))
    return nll + 0.5 * l2_penalty * float(weights @ weights)


def nll_gradient(X, y, weights, intercept, l2_penalty):
    residual = sigmoid(X @ weights + intercept) - y
    grad_w = X.T @ residual + l2_penalty * weights
    grad_b = float(residual.sum())
    return grad_w, grad_b


def fit_logistic(
    X,
    y,
    l2_penalty: float = 1e-4,
    tol: float = 1e-6,
    max_iter: int = 500,
    column_names: list[str] | None = None,
) -> LogisticModel:
    """Fit by maximizing the penalized likelihood; converged when the
    gradient max-norm drops below ``tol``."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if l2_penalty < 0:
        raise ValueError("l2_penalty must be non-negative")
    if y.min() == y.max():
        raise ValueError("training data contains a single class")
    n, d = X.shape
    weights = np.zeros(d)
    intercept = 0.0
    nll = penalized_nll(X, y, weights, intercept, l2_penalty)
    step = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad_w, grad_b = nll_gradient(X, y, weights, intercept, l2_penalty)
        gmax = max(float(np.max(np.abs(grad_w))) if d else 0.0, abs(grad_b))
        if gmax < tol:
            converged = True
            it -= 1
            break
        gsq = float(grad_w @ grad_w) + grad_b * grad_b
        # Armijo backtracking keeps every accepted step a strict descent.
        while step > 1e-14:
            w_try = weights - step * grad_w
            b_try = intercept - step * grad_b
            nll_try = penalized_nll(X, y, w_try, b_try, l2_penalty)
            if np.isfinite(nll_try) and nll_try <= nll - 1e-4 * step * gsq:
                break
            step *= 0.5
        else:
            break  # step collapsed; report not converged
        weights, intercept, nll = w_try, b_try, nll_try
        step = min(step * 2.0, 1e6)
    if not np.isfinite(nll):
        raise RuntimeError("non-finite loss; data may be separable, increase l2_penalty")
    return LogisticModel(
        weights=weights,
        intercept=float(intercept),
        l2_penalty=l2_penalty,
        converged=converged,
        n_iter=it,
        final_nll=float(nll),
        column_names=column_names,
    )


def predict_proba(model: LogisticModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return sigmoid(X @ model.weights + model.intercept)
