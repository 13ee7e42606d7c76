"""CART trees (Gini classification, squared-error regression) and random forests."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import DomainError, SpecError

_TIE = 1e-12
LEAF = -1


def gini_impurity(counts):
    counts = np.asarray(counts, dtype=np.float64)
    if np.any(counts < 0):
        raise DomainError("class counts must be non-negative")
    total = counts.sum()
    if total == 0:
        raise DomainError("gini impurity of an empty node is undefined")
    p = counts / total
    return float(1.0 - (p ** 2).sum())


class Split(NamedTuple):
    feature: int
    threshold: float
    decrease: float


def _scan(X, y, min_samples_leaf):
    """Split gain proxy at every sorted position of every column of ``X``.

    Both criteria reduce to maximising ``sl^2/nl + sr^2/nr`` (``sl``, ``sr``
    the child label sums): for 0/1 labels the Gini decrease is
    ``2 (proxy - s^2/n) / n`` and the variance decrease is half that.
    Returns ``(sorted X, proxy)``; row ``i`` of ``proxy`` is the split
    between sorted positions ``i`` and ``i + 1``, and inadmissible splits
    (equal neighbours, undersized children) hold -inf.
    """
    n = len(y)
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    s_left = np.cumsum(y[order], axis=0)[:-1]
    s_right = s_left[-1] + y[order[-1]] - s_left
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    proxy = s_left * s_left
    proxy /= n_left
    s_right *= s_right
    s_right /= n - n_left
    proxy += s_right
    proxy[xs[1:] <= xs[:-1]] = -np.inf
    if min_samples_leaf > 1:
        proxy[: min_samples_leaf - 1] = -np.inf
        proxy[n - min_samples_leaf:] = -np.inf
    return xs, proxy


def best_split(X, y, rows=None, features=None, min_samples_leaf=1, criterion="gini"):
    """Exhaustive midpoint scan over ``features`` for the node holding ``rows``.

    Maximises the weighted impurity decrease; ties go to the lowest feature
    index, then the lowest threshold. Returns None when no split decreases
    the impurity.
    """
    if criterion not in ("gini", "squared_error"):
        raise SpecError(f"unknown criterion {criterion!r}")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if rows is not None:
        X, y = X[rows], y[rows]
    features = np.arange(X.shape[1]) if features is None else np.sort(np.asarray(features))
    n = len(y)
    if n < 2 or len(features) == 0:
        return None
    xs, proxy = _scan(X[:, features], y, min_samples_leaf)
    scale = (2.0 if criterion == "gini" else 1.0) / n
    total = y.sum()
    dec = (proxy.max(axis=0) - total * total / n) * scale
    top = dec.max()
    if not top > _TIE:
        return None
    j = int(np.flatnonzero(dec >= top - _TIE)[0])
    column = (proxy[:, j] - total * total / n) * scale
    i = int(np.flatnonzero(column >= dec[j] - _TIE)[0])
    lo, hi = xs[i, j], xs[i + 1, j]
    threshold = (lo + hi) / 2.0
    # adjacent floats can round the midpoint up onto the right value
    if not threshold < hi:
        threshold = lo
    return Split(int(features[j]), float(threshold), float(column[i]))


def resolve_max_features(max_features, m):
    if max_features in (None, "all", "none", "None"):
        return m
    if max_features == "sqrt":
        return max(1, int(np.sqrt(m)))
    if max_features == "log2":
        return max(1, int(np.log2(m)))
    if isinstance(max_features, float) and 0 < max_features <= 1:
        return max(1, int(max_features * m))
    if isinstance(max_features, (int, np.integer)) and 1 <= max_features:
        return min(int(max_features), m)
    raise SpecError(f"invalid max_features {max_features!r}")


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # class-1 fraction (gini) or mean target (squared error)
    n_samples: np.ndarray

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def depth(self):
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X):
        """Leaf index reached by each row (``x <= threshold`` goes left)."""
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            idx = np.flatnonzero(active)
            cur = node[idx]
            go_left = X[idx, self.feature[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active[idx] = self.feature[node[idx]] != LEAF
        return node

    def score(self, X):
        return self.value[self.apply(X)]


def fit_tree(X, y, max_depth=None, min_samples_split=2, min_samples_leaf=1,
             max_features=None, criterion="gini", rng=None, rows=None):
    """Grow a CART tree depth-first.

    ``rows`` may repeat indices (bootstrap samples). A fresh feature subset
    of size ``max_features`` is drawn from ``rng`` at every node.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if criterion not in ("gini", "squared_error"):
        raise SpecError(f"unknown criterion {criterion!r}")
    if max_depth is not None and max_depth < 1:
        raise SpecError("max_depth must be >= 1 or None")
    if min_samples_split < 2 or min_samples_leaf < 1:
        raise SpecError("min_samples_split must be >= 2 and min_samples_leaf >= 1")
    rows = np.arange(len(X)) if rows is None else np.asarray(rows)
    if len(rows) == 0:
        raise SpecError("cannot fit a tree on zero rows")
    m = X.shape[1]
    k = resolve_max_features(max_features, m)
    rng = np.random.default_rng(0) if rng is None else rng

    feature, threshold, left, right, value, n_samples = [], [], [], [], [], []

    def new_node(idx):
        feature.append(LEAF)
        threshold.append(np.nan)
        left.append(LEAF)
        right.append(LEAF)
        value.append(float(y[idx].mean()))
        n_samples.append(len(idx))
        return len(feature) - 1

    root = new_node(rows)
    stack = [(root, rows, 0)]
    while stack:
        node, idx, depth = stack.pop()
        yy = y[idx]
        if (len(idx) < min_samples_split
                or (max_depth is not None and depth >= max_depth)
                or np.all(yy == yy[0])):
            continue
        features = np.arange(m) if k == m else np.sort(rng.choice(m, size=k, replace=False))
        split = best_split(X[np.ix_(idx, features)], yy, None, None, min_samples_leaf, criterion)
        if split is None:
            continue
        split = split._replace(feature=int(features[split.feature]))
        mask = X[idx, split.feature] <= split.threshold
        li, ri = idx[mask], idx[~mask]
        feature[node] = split.feature
        threshold[node] = split.threshold
        left[node] = new_node(li)
        right[node] = new_node(ri)
        # right pushed first so the left subtree is numbered first
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value),
        n_samples=np.array(n_samples, dtype=np.int64),
    )


def tree_rng(seed, index):
    return np.random.default_rng([int(seed), int(index)])


def bootstrap_rows(seed, index, n):
    return np.random.default_rng([int(seed), int(index), 1]).integers(0, n, size=n)


@dataclass(frozen=True)
class Forest:
    trees: tuple

    def score(self, X):
        per_tree = np.array([t.score(X) for t in self.trees])
        # sorting before summing makes the average independent of tree order
        return np.sort(per_tree, axis=0).sum(axis=0) / len(self.trees)


def fit_forest(X, y, n_estimators=100, max_depth=None, min_samples_split=2,
               min_samples_leaf=1, max_features="sqrt", bootstrap=True, seed=0, threads=1):
    """Bagged CART trees; tree ``i`` draws its bootstrap sample and feature
    subsets from streams keyed on ``(seed, i)``, so the result does not
    depend on ``threads``."""
    if n_estimators < 1:
        raise SpecError("n_estimators must be >= 1")
    X = np.asarray(X, dtype=np.float64)
    n = len(X)

    def grow(i):
        rows = bootstrap_rows(seed, i, n) if bootstrap else None
        return fit_tree(X, y, max_depth, min_samples_split, min_samples_leaf,
                        max_features, "gini", tree_rng(seed, i), rows)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            trees = list(pool.map(grow, range(n_estimators)))
    else:
        trees = [grow(i) for i in range(n_estimators)]
    return Forest(tuple(trees))
