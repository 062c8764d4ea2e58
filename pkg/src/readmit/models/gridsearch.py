"""Exhaustive hyperparameter search over shared cross-validation folds.

Every configuration in the Cartesian product is scored by mean validation
AUC over the same fold set; the winner is the maximal mean, ties broken by
earliest grid position. Per-(configuration, fold) seeds derive from the
master seed so results do not depend on evaluation order or worker count.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from itertools import product
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..evaluation import auc_score
from ..seeding import GRID_STREAM, derive_seed
from .forest import fit_random_forest, rf_predict_proba
from .svm import fit_linear_svm, svm_decision_scores


@dataclass
class GridSearchResult:
    param_names: list[str]
    configs: list[dict]
    fold_aucs: np.ndarray     # (n_configs, n_folds)
    mean_aucs: np.ndarray
    winner_index: int

    @property
    def winner(self) -> dict:
        return self.configs[self.winner_index]


def expand_grid(grid: dict[str, list]) -> list[dict]:
    """Cartesian product preserving declared parameter and value order."""
    if not grid or any(not values for values in grid.values()):
        raise ConfigError(f"empty parameter grid: {grid!r}")
    names = list(grid)
    return [dict(zip(names, combo)) for combo in product(*grid.values())]


def rf_fold_auc(X, y, fit_idx, val_idx, params: dict, seed: int) -> float:
    model = fit_random_forest(X[fit_idx], y[fit_idx], seed=seed, **params)
    return auc_score(rf_predict_proba(model, X[val_idx]), y[val_idx])


def svm_fold_auc(X, y, fit_idx, val_idx, params: dict, seed: int) -> float:
    model = fit_linear_svm(X[fit_idx], y[fit_idx], seed=seed, **params)
    return auc_score(svm_decision_scores(model, X[val_idx]), y[val_idx])


def _eval_config(config_index, *, evaluator, X, y, folds, configs, seed):
    return [
        evaluator(X, y, fit_idx, val_idx, configs[config_index],
                  derive_seed(seed, GRID_STREAM, config_index, fold_index))
        for fold_index, (fit_idx, val_idx) in enumerate(folds)
    ]


def grid_search(
    evaluator,
    grid: dict[str, list],
    X,
    y,
    folds,
    seed: int,
    jobs: int = 1,
) -> GridSearchResult:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    configs = expand_grid(grid)
    worker = partial(_eval_config, evaluator=evaluator, X=X, y=y,
                     folds=folds, configs=configs, seed=seed)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(worker, range(len(configs))))
    else:
        rows = [worker(i) for i in range(len(configs))]
    fold_aucs = np.array(rows, dtype=np.float64)
    mean_aucs = fold_aucs.mean(axis=1)
    return GridSearchResult(
        param_names=list(grid),
        configs=configs,
        fold_aucs=fold_aucs,
        mean_aucs=mean_aucs,
        winner_index=int(np.argmax(mean_aucs)),
    )


def write_grid_csv(result: GridSearchResult, dest):
    fh, close = (open(dest, "w", newline="", encoding="utf-8"), True) \
        if isinstance(dest, (str, Path)) else (dest, False)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        n_folds = result.fold_aucs.shape[1]
        writer.writerow(
            result.param_names
            + [f"fold_{i}_auc" for i in range(n_folds)]
            + ["mean_auc", "winner"]
        )
        for i, config in enumerate(result.configs):
            writer.writerow(
                [str(config[p]) for p in result.param_names]
                + [repr(v) for v in result.fold_aucs[i].tolist()]
                + [repr(float(result.mean_aucs[i])),
                   "1" if i == result.winner_index else "0"]
            )
    finally:
        if close:
            fh.close()
