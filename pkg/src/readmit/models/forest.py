"""Random forest classifier built from scratch.

Each tree trains on a seeded bootstrap sample (n draws with replacement).
Nodes are grown best-first by Gini impurity decrease so the terminal-node
budget (``maxnodes``) binds exactly; candidate splits consider ``mtry``
features sampled without replacement per node, with thresholds at midpoints
between adjacent distinct sorted values, and both children must keep at
least ``nodesize`` bootstrap rows. Gini importances accumulate the weighted
impurity decrease per split feature and are normalized to sum to one.
"""

from __future__ import annotations

import heapq
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..seeding import seed_sequence


@dataclass
class Tree:
    feature: np.ndarray     # int32; -1 marks a leaf
    threshold: np.ndarray   # float64
    left: np.ndarray        # int32
    right: np.ndarray       # int32
    value: np.ndarray       # float64, positive-class fraction of node rows
    n_samples: np.ndarray   # int32, bootstrap rows reaching the node

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())


@dataclass
class RandomForestModel:
    trees: list[Tree]
    ntree: int
    mtry: int
    nodesize: int
    maxnodes: int
    seed: int
    importances: np.ndarray
    column_names: list[str] | None = field(default=None, repr=False)


class _CodedMatrix:
    """Per-column value codes for split search by counting.

    Each column is mapped once to dense ranks over its sorted distinct
    values; per-node class counts per value then come from one bincount
    instead of a sort, with gains identical to the sorted-scan formula.
    """

    def __init__(self, X):
        n, d = X.shape
        self.codes = np.empty((n, d), dtype=np.int32)
        self.uniques = []
        for j in range(d):
            uniq, inverse = np.unique(X[:, j], return_inverse=True)
            self.codes[:, j] = inverse
            self.uniques.append(uniq)
        self.n_bins = np.array([u.size for u in self.uniques], dtype=np.int64)


def _best_split(coded_rows, yb, rows, feats, nodesize, coded: _CodedMatrix):
    """Best (gain, feature, threshold, left_rows, right_rows) for one node,
    or None if no valid split improves impurity."""
    n = rows.size
    if n < 2 * nodesize:
        return None
    yr = yb[rows]
    total_pos = int(yr.sum())
    if total_pos == 0 or total_pos == n:
        return None
    m = feats.size
    B = int(coded.n_bins[feats].max())
    sub = coded_rows[np.ix_(rows, feats)]
    offsets = (np.arange(m, dtype=np.int32) * B)[None, :]
    shifted = sub + offsets
    total = np.bincount(shifted.ravel(), minlength=m * B).reshape(m, B).astype(np.float64)
    pos = np.bincount(shifted[yr == 1].ravel(), minlength=m * B).reshape(m, B).astype(np.float64)
    left_n = np.cumsum(total, axis=1)
    left_pos = np.cumsum(pos, axis=1)
    right_n = n - left_n
    right_pos = total_pos - left_pos
    node_impurity = 2.0 * total_pos * (n - total_pos) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        children = (
            2.0 * left_pos * (left_n - left_pos) / left_n
            + 2.0 * right_pos * (right_n - right_pos) / right_n
        )
    gains = node_impurity - children
    valid = (total > 0) & (left_n >= nodesize) & (right_n >= nodesize)
    gains[~valid] = -np.inf
    best = int(np.argmax(gains))
    j, b = divmod(best, B)
    best_gain = float(gains[j, b])
    if not np.isfinite(best_gain) or best_gain <= 0.0:
        return None
    feature = int(feats[j])
    nxt = b + 1
    while total[j, nxt] == 0.0:
        nxt += 1
    lo = float(coded.uniques[feature][b])
    hi = float(coded.uniques[feature][nxt])
    threshold = (lo + hi) / 2.0
    if not lo < threshold < hi:
        threshold = lo   # adjacent floats: keep the float and rank splits equal
    go_left = coded_rows[rows, feature] <= b
    return best_gain, feature, threshold, rows[go_left], rows[~go_left]


def _fit_tree(coded: _CodedMatrix, y, mtry, nodesize, maxnodes, rng):
    n, d = coded.codes.shape
    importances = np.zeros(d)
    boot = rng.integers(0, n, n)
    coded_rows = coded.codes[boot]
    yb = y[boot].astype(np.int64)

    feature = [-1]
    threshold = [0.0]
    left = [-1]
    right = [-1]
    value = [float(yb.mean())]
    n_samples = [n]

    heap = []
    counter = 0

    def consider(node_id, rows):
        nonlocal counter
        feats = rng.choice(d, size=mtry, replace=False)
        split = _best_split(coded_rows, yb, rows, feats, nodesize, coded)
        if split is not None:
            heapq.heappush(heap, (-split[0], counter, node_id, split))
            counter += 1

    consider(0, np.arange(n, dtype=np.intp))
    leaves = 1
    while heap and leaves < maxnodes:
        _, _, node_id, (gain, feat, thr, rows_l, rows_r) = heapq.heappop(heap)
        importances[feat] += gain
        feature[node_id] = feat
        threshold[node_id] = thr
        for rows, side in ((rows_l, "left"), (rows_r, "right")):
            child = len(feature)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            child_y = yb[rows]
            value.append(float(child_y.mean()))
            n_samples.append(int(rows.size))
            if side == "left":
                left[node_id] = child
            else:
                right[node_id] = child
            consider(child, rows)
        leaves += 1
    tree = Tree(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        value=np.array(value, dtype=np.float64),
        n_samples=np.array(n_samples, dtype=np.int32),
    )
    return tree, importances


def _fit_tree_range(coded, y, mtry, nodesize, maxnodes, seed, start, count, ntree):
    children = seed_sequence(seed).spawn(ntree)[start:start + count]
    out = []
    for child in children:
        rng = np.random.Generator(np.random.PCG64(child))
        out.append(_fit_tree(coded, y, mtry, nodesize, maxnodes, rng))
    return out


def fit_random_forest(
    X,
    y,
    ntree: int,
    mtry: int,
    nodesize: int,
    maxnodes: int,
    seed: int,
    column_names: list[str] | None = None,
    jobs: int = 1,
) -> RandomForestModel:
    """Trees are independent given their spawned seeds, so ``jobs`` workers
    fit disjoint tree ranges; per-tree importance partials are reduced in
    tree-index order, making the result identical for any worker count."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n, d = X.shape
    if n == 0:
        raise ValueError("empty training set")
    if not 1 <= mtry <= d:
        raise ValueError(f"mtry {mtry} out of range for {d} features")
    if nodesize < 1 or maxnodes < 1 or ntree < 1:
        raise ValueError("ntree, nodesize and maxnodes must be positive")
    coded = _CodedMatrix(X)
    if jobs > 1 and ntree > 1:
        workers = min(jobs, ntree)
        bounds = np.linspace(0, ntree, workers + 1).astype(int)
        tasks = [(coded, y, mtry, nodesize, maxnodes, seed, int(lo), int(hi - lo), ntree)
                 for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
        context = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=context) as pool:
            chunks = list(pool.map(_fit_tree_range_star, tasks))
        fitted = [item for chunk in chunks for item in chunk]
    else:
        fitted = _fit_tree_range(coded, y, mtry, nodesize, maxnodes, seed, 0, ntree, ntree)
    trees = [tree for tree, _ in fitted]
    importances = np.zeros(d)
    for _, partial in fitted:
        importances += partial
    total = importances.sum()
    if total > 0:
        importances = importances / total
    return RandomForestModel(
        trees=trees,
        ntree=ntree,
        mtry=mtry,
        nodesize=nodesize,
        maxnodes=maxnodes,
        seed=seed,
        importances=importances,
        column_names=column_names,
    )


def _fit_tree_range_star(args):
    return _fit_tree_range(*args)


def _tree_scores(tree: Tree, X) -> np.ndarray:
    node = np.zeros(X.shape[0], dtype=np.int32)
    for _ in range(len(tree.feature)):
        active = np.flatnonzero(tree.feature[node] >= 0)
        if active.size == 0:
            break
        cur = node[active]
        go_left = X[active, tree.feature[cur]] <= tree.threshold[cur]
        node[active] = np.where(go_left, tree.left[cur], tree.right[cur])
    return tree.value[node]


def rf_predict_proba(model: RandomForestModel, X) -> np.ndarray:
    """Mean over trees of leaf positive-class fractions."""
    X = np.asarray(X, dtype=np.float64)
    total = np.zeros(X.shape[0])
    for tree in model.trees:
        total += _tree_scores(tree, X)
    return total / len(model.trees)


def rf_importances(model: RandomForestModel) -> list[tuple[str, float]]:
    """(feature, importance) pairs in descending importance; ties keep
    column order."""
    names = model.column_names or [f"x{i}" for i in range(model.importances.size)]
    order = sorted(range(len(names)), key=lambda i: (-model.importances[i], i))
    return [(names[i], float(model.importances[i])) for i in order]


def forest_to_text(model: RandomForestModel) -> str:
    """Canonical text dump; equal strings mean equal forests."""
    lines = [
        f"ntree={model.ntree} mtry={model.mtry} nodesize={model.nodesize} "
        f"maxnodes={model.maxnodes} seed={model.seed}"
    ]
    for i, imp in enumerate(model.importances.tolist()):
        lines.append(f"imp {i} {imp!r}")
    for t, tree in enumerate(model.trees):
        lines.append(f"tree {t} nodes {len(tree.feature)}")
        for k in range(len(tree.feature)):
            lines.append(
                f"{k} {tree.feature[k]} {tree.threshold[k].item()!r} "
                f"{tree.left[k]} {tree.right[k]} {tree.value[k].item()!r} {tree.n_samples[k]}"
            )
    return "\n".join(lines) + "\n"
