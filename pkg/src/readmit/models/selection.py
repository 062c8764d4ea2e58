"""Greedy forward feature selection scored by likelihood-ratio tests.

At each step the candidate column whose inclusion maximizes the
likelihood-ratio statistic (twice the unpenalized log-likelihood gain over
the current model) is added; selection stops when the best candidate's
chi-square p-value on one degree of freedom reaches the significance
threshold.
"""

from __future__ import annotations

import math

import numpy as np

from .logistic import fit_logistic, penalized_nll


def chi2_sf_1df(stat: float) -> float:
    """Survival function of chi-square with one degree of freedom."""
    if stat <= 0:
        return 1.0
    return math.erfc(math.sqrt(stat / 2.0))


def _loglik(X, y, l2, tol, max_iter) -> float:
    """Unpenalized log-likelihood at the (lightly penalized) fit."""
    model = fit_logistic(X, y, l2_penalty=l2, tol=tol, max_iter=max_iter)
    return -penalized_nll(X, y, model.weights, model.intercept, 0.0)


def loglik_feature_select(
    X,
    y,
    significance: float = 0.05,
    l2_penalty: float = 1e-6,
    tol: float = 1e-6,
    max_iter: int = 200,
) -> list[int]:
    """Column indices in inclusion order. Constant columns are skipped."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    usable = [j for j in range(d) if X[:, j].min() != X[:, j].max()]
    selected: list[int] = []
    current_ll = _loglik(X[:, :0], y, l2_penalty, tol, max_iter)
    while usable:
        best_j, best_stat, best_ll = None, -math.inf, None
        for j in usable:
            trial = X[:, selected + [j]]
            ll = _loglik(trial, y, l2_penalty, tol, max_iter)
            stat = 2.0 * (ll - current_ll)
            if stat > best_stat:
                best_j, best_stat, best_ll = j, stat, ll
        if best_j is None or chi2_sf_1df(max(best_stat, 0.0)) >= significance:
            break
        selected.append(best_j)
        usable.remove(best_j)
        current_ll = best_ll
    return selected
