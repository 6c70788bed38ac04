"""CART decision trees and a random-forest grant classifier.

Split search is exhaustive over midpoints between consecutive distinct
sorted values, maximizing the weighted Gini impurity decrease. Importance
comes in two flavors: the frequency-weighted score (splits on a feature
counted with weight n_node / n_training) and classic mean-decrease-impurity.

Training is a pure function of (matrix, labels, config): tree i draws its
randomness from an RNG derived from (seed, i), so fitting trees in any order
or in parallel yields the identical forest.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import TrainingError


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 500
    mtry: int = None        # None -> ceil(sqrt(p))
    min_leaf: int = 1
    max_depth: int = None
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.mtry is not None and self.mtry < 1:
            raise ValueError("mtry must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")

    def resolve_mtry(self, p):
        if self.mtry is None:
            return max(1, math.ceil(math.sqrt(p)))
        if self.mtry > p:
            raise ValueError(f"mtry={self.mtry} exceeds column count {p}")
        return self.mtry

    def to_dict(self):
        return {
            "n_trees": self.n_trees,
            "mtry": self.mtry,
            "min_leaf": self.min_leaf,
            "max_depth": self.max_depth,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class TreeNode:
    """Internal node (column/threshold/children) or leaf (counts/prob)."""

    n_node: int
    counts: tuple
    prob: float
    column: int = None
    threshold: float = None
    impurity_decrease: float = 0.0
    left: "TreeNode" = None
    right: "TreeNode" = None

    @property
    def is_leaf(self):
        return self.left is None

    def to_dict(self):
        d = {"n": self.n_node, "counts": list(self.counts), "prob": self.prob}
        if not self.is_leaf:
            d.update(
                column=self.column,
                threshold=self.threshold,
                decrease=self.impurity_decrease,
                left=self.left.to_dict(),
                right=self.right.to_dict(),
            )
        return d

    @classmethod
    def from_dict(cls, d):
        node = cls(n_node=d["n"], counts=tuple(d["counts"]), prob=d["prob"])
        if "column" in d:
            node.column = d["column"]
            node.threshold = d["threshold"]
            node.impurity_decrease = d["decrease"]
            node.left = cls.from_dict(d["left"])
            node.right = cls.from_dict(d["right"])
        return node


@dataclass(frozen=True)
class RandomForestModel:
    trees: tuple
    config: ForestConfig
    column_names: tuple
    column_features: tuple
    n_training: int
    oob_accuracy: float = None


@dataclass(frozen=True)
class ImportanceEntry:
    feature: str
    score: float
    method: str


def gini_impurity(class_counts):
    """1 - sum(p_k^2) over the class proportions; in [0, 0.5] for two classes."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if np.any(counts < 0):
        raise ValueError("class counts must be non-negative")
    total = counts.sum()
    if total == 0:
        raise ValueError("class counts are all zero")
    p = counts / total
    return float(1.0 - np.dot(p, p))


def _quality_greater(q_a, q_b):
    """Exact comparison of two split qualities (num, nL, nR) cross-multiplied."""
    num_a, nl_a, nr_a = q_a
    num_b, nl_b, nr_b = q_b
    return num_a * (nl_b * nr_b) > num_b * (nl_a * nr_a)


def best_split(X, y, candidate_columns, min_leaf=1):
    """Exhaustive best split over candidate columns and midpoint thresholds.

    Returns (column, threshold, impurity_decrease) maximizing the weighted
    Gini decrease, or None when no split has positive decrease or satisfies
    min_leaf on both sides. Ties break to the lower column index, then the
    lower threshold; tie detection is exact (integer arithmetic), so float
    rounding never decides between mathematically equal splits.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n = len(y)
    if n < 2:
        return None
    total1 = int(y.sum())
    total0 = n - total1
    parent = gini_impurity((total0, total1))
    if parent == 0.0:
        return None

    # Float pass: per-column candidate decreases, vectorized.
    per_column = []
    best_float = -np.inf
    for col in sorted(int(c) for c in candidate_columns):
        x = X[:, col]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ys = y[order]
        boundaries = np.nonzero(xs[1:] > xs[:-1])[0]
        if boundaries.size == 0:
            continue
        n_left = boundaries + 1
        n_right = n - n_left
        ok = (n_left >= min_leaf) & (n_right >= min_leaf)
        if not ok.any():
            continue
        cum1 = np.cumsum(ys)
        ones_left = cum1[boundaries]
        zeros_left = n_left - ones_left
        ones_right = total1 - ones_left
        zeros_right = n_right - ones_right
        gini_left = 1.0 - (ones_left**2 + zeros_left**2) / n_left.astype(np.float64) ** 2
        gini_right = 1.0 - (ones_right**2 + zeros_right**2) / n_right.astype(np.float64) ** 2
        decrease = parent - (n_left * gini_left + n_right * gini_right) / n
        decrease[~ok] = -np.inf
        col_best = float(decrease.max())
        best_float = max(best_float, col_best)
        per_column.append((col, xs, boundaries, ones_left, n_left, decrease))
    if not np.isfinite(best_float):
        return None

    # Exact pass over near-ties of the float winner.
    winner = None          # (col, threshold, decrease_float)
    winner_quality = None  # (num, nL, nR) integer key
    tol = 1e-12
    for col, xs, boundaries, ones_left, n_left, decrease in per_column:
        close = np.nonzero(decrease >= best_float - tol)[0]
        for i in close:
            nl = int(n_left[i])
            nr = n - nl
            ol = int(ones_left[i])
            orr = total1 - ol
            zl = nl - ol
            zr = nr - orr
            num = (ol * ol + zl * zl) * nr + (orr * orr + zr * zr) * nl
            quality = (num, nl, nr)
            if winner is not None and not _quality_greater(quality, winner_quality):
                continue  # strict improvement only: earlier (col, threshold) wins ties
            b = int(boundaries[i])
            threshold = (xs[b] + xs[b + 1]) / 2.0
            winner = (col, float(threshold), float(decrease[i]))
            winner_quality = quality
    if winner is None:
        return None
    # Positive decrease, checked exactly: quality must beat the no-split value.
    # decrease > 0  <=>  num/(nL*nR) > (a^2+b^2)/n  <=>  num*n > (a^2+b^2)*nL*nR
    num, nl, nr = winner_quality
    if num * n <= (total1 * total1 + total0 * total0) * nl * nr:
        return None
    return winner


def _grow_tree(X, y, idx, depth, rng, mtry, min_leaf, max_depth):
    sub_y = y[idx]
    n1 = int(sub_y.sum())
    n0 = len(idx) - n1
    node = TreeNode(n_node=len(idx), counts=(n0, n1), prob=n1 / len(idx))
    if n0 == 0 or n1 == 0 or len(idx) < 2 * min_leaf:
        return node
    if max_depth is not None and depth >= max_depth:
        return node
    p = X.shape[1]
    candidates = rng.choice(p, size=mtry, replace=False) if mtry < p else np.arange(p)
    found = best_split(X[idx], sub_y, candidates, min_leaf)
    if found is None:
        return node
    col, threshold, decrease = found
    node.column = col
    node.threshold = threshold
    node.impurity_decrease = decrease
    go_left = X[idx, col] <= threshold
    node.left = _grow_tree(X, y, idx[go_left], depth + 1, rng, mtry, min_leaf, max_depth)
    node.right = _grow_tree(X, y, idx[~go_left], depth + 1, rng, mtry, min_leaf, max_depth)
    return node


def _tree_rng(seed, tree_index):
    # Derived stream per tree: identical forests regardless of fit order.
    root = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(
        entropy=root.entropy, spawn_key=(tree_index,)
    ))


def _apply_tree(node, X, out, idx):
    if node.is_leaf:
        out[idx] = node.prob
        return
    go_left = X[idx, node.column] <= node.threshold
    _apply_tree(node.left, X, out, idx[go_left])
    _apply_tree(node.right, X, out, idx[~go_left])


def tree_predict_proba(node, X):
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.float64)
    _apply_tree(node, X, out, np.arange(X.shape[0]))
    return out


def fit_forest(X, y, config, column_names=None, column_features=None):
    """Train the forest; each tree sees a bootstrap resample of the rows.

    OOB accuracy is estimated from out-of-bag votes when bootstrap is on.
    Raises TrainingError when the labels contain a single class.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("matrix must be 2-D and non-empty")
    if X.shape[0] != len(y):
        raise ValueError("matrix and labels disagree on row count")
    if not set(np.unique(y)) <= {0, 1}:
        raise ValueError("labels must be binary 0/1")
    if len(np.unique(y)) < 2:
        raise TrainingError("labels contain a single class; nothing to classify")
    n, p = X.shape
    mtry = config.resolve_mtry(p)
    if column_names is None:
        column_names = tuple(f"x{j}" for j in range(p))
    column_names = tuple(column_names)
    if len(column_names) != p:
        raise ValueError("column_names length must match matrix width")
    column_features = tuple(column_features) if column_features else column_names

    trees = []
    oob_prob_sum = np.zeros(n)
    oob_votes = np.zeros(n, dtype=np.int64)
    for i in range(config.n_trees):
        rng = _tree_rng(config.seed, i)
        if config.bootstrap:
            sample = rng.integers(0, n, n)
        else:
            sample = np.arange(n)
        tree = _grow_tree(
            X, y, np.asarray(sample), 0, rng, mtry, config.min_leaf, config.max_depth
        )
        trees.append(tree)
        if config.bootstrap:
            oob = np.setdiff1d(np.arange(n), sample, assume_unique=False)
            if oob.size:
                probs = np.empty(n)
                _apply_tree(tree, X, probs, oob)
                oob_prob_sum[oob] += probs[oob]
                oob_votes[oob] += 1

    oob_accuracy = None
    if config.bootstrap:
        seen = oob_votes > 0
        if seen.any():
            pred = (oob_prob_sum[seen] / oob_votes[seen]) >= 0.5
            oob_accuracy = float(np.mean(pred == (y[seen] == 1)))
    return RandomForestModel(
        trees=tuple(trees),
        config=config,
        column_names=column_names,
        column_features=column_features,
        n_training=n,
        oob_accuracy=oob_accuracy,
    )


def _check_row(model, row):
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1 or row.shape[0] != len(model.column_names):
        raise ValueError(
            f"row has {row.shape[-1] if row.ndim else 0} values, "
            f"model expects {len(model.column_names)}"
        )
    return row


def predict_proba(model, row):
    """Mean over trees of the leaf grant probability, in [0, 1]."""
    row = _check_row(model, row)
    total = 0.0
    for tree in model.trees:
        node = tree
        while not node.is_leaf:
            node = node.left if row[node.column] <= node.threshold else node.right
        total += node.prob
    return total / len(model.trees)


def predict_proba_many(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(model.column_names):
        raise ValueError("matrix width does not match model columns")
    acc = np.zeros(X.shape[0])
    for tree in model.trees:
        acc += tree_predict_proba(tree, X)
    return acc / len(model.trees)


def predict_label(model, row, threshold=0.5):
    """1 iff the grant probability is >= threshold (exact ties grant)."""
    return 1 if predict_proba(model, row) >= threshold else 0


def _accumulate_node_scores(node, scores_freq, scores_mdi):
    if node.is_leaf:
        return
    scores_freq[node.column] += node.n_node
    scores_mdi[node.column] += node.n_node * node.impurity_decrease
    _accumulate_node_scores(node.left, scores_freq, scores_mdi)
    _accumulate_node_scores(node.right, scores_freq, scores_mdi)


def importance(model, method="frequency_weighted", normalized=True):
    """Per-feature importance, descending; ties break lexicographically.

    frequency_weighted: each split on a feature counts n_node observations;
    mean_decrease_impurity: the same weight times the node's Gini decrease.
    With normalized=True scores are divided by n_trees * n_training (so a
    single root stump scores 1.0); the raw sums remain available because
    their magnitudes are what per-model rankings are usually quoted in.
    One-hot columns roll up into their parent feature by summation.
    """
    if method not in ("frequency_weighted", "mean_decrease_impurity"):
        raise ValueError(f"unknown importance method {method!r}")
    p = len(model.column_names)
    freq = np.zeros(p)
    mdi = np.zeros(p)
    for tree in model.trees:
        _accumulate_node_scores(tree, freq, mdi)
    raw = freq if method == "frequency_weighted" else mdi
    if normalized:
        raw = raw / (len(model.trees) * model.n_training)
    by_feature = {}
    for j, feat in enumerate(model.column_features):
        by_feature[feat] = by_feature.get(feat, 0.0) + float(raw[j])
    entries = [
        ImportanceEntry(feature=f, score=s, method=method) for f, s in by_feature.items()
    ]
    entries.sort(key=lambda e: (-e.score, e.feature))
    return entries


def forest_to_dict(model):
    return {
        "config": model.config.to_dict(),
        "column_names": list(model.column_names),
        "column_features": list(model.column_features),
        "n_training": model.n_training,
        "oob_accuracy": model.oob_accuracy,
        "trees": [t.to_dict() for t in model.trees],
    }


def forest_from_dict(d):
    return RandomForestModel(
        trees=tuple(TreeNode.from_dict(t) for t in d["trees"]),
        config=ForestConfig.from_dict(d["config"]),
        column_names=tuple(d["column_names"]),
        column_features=tuple(d["column_features"]),
        n_training=d["n_training"],
        oob_accuracy=d["oob_accuracy"],
    )
