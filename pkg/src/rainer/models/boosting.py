"""Gradient boosting for binary log-loss with regression trees."""

from dataclasses import dataclass

import numpy as np

from ..errors import SpecError
from .linear import log_loss, sigmoid
from .tree import fit_tree


@dataclass(frozen=True)
class BoostedTrees:
    base_logit: float
    learning_rate: float
    trees: tuple
    leaf_values: tuple  # per stage, indexed by tree node id
    loss_trace: np.ndarray

    def decision(self, X):
        F = np.full(len(X), self.base_logit)
        for tree, values in zip(self.trees, self.leaf_values):
            F += self.learning_rate * values[tree.apply(X)]
        return F

    def score(self, X):
        return sigmoid(self.decision(X))


def fit_gboost(X, y, n_stages=100, learning_rate=0.1, max_depth=3, min_samples_leaf=1):
    """Stagewise logistic boosting.

    Each stage fits a squared-error tree to the residuals ``y - p`` and
    replaces its leaf means by one Newton step, ``sum(r) / sum(p (1 - p))``.
    ``loss_trace[0]`` is the loss of the constant start; entry ``s`` follows
    stage ``s``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if n_stages < 1:
        raise SpecError("n_stages must be >= 1")
    if learning_rate < 0:
        raise SpecError("learning_rate must be non-negative")
    rate = np.clip(y.mean(), 1e-12, 1 - 1e-12)
    base = float(np.log(rate / (1.0 - rate)))
    F = np.full(len(y), base)
    trace = [log_loss(y, F)]
    trees, leaf_values = [], []
    for _ in range(n_stages):
        p = sigmoid(F)
        residual = y - p
        tree = fit_tree(X, residual, max_depth=max_depth, min_samples_leaf=min_samples_leaf,
                        criterion="squared_error")
        leaves = tree.apply(X)
        num = np.bincount(leaves, weights=residual, minlength=tree.n_nodes)
        den = np.bincount(leaves, weights=p * (1.0 - p), minlength=tree.n_nodes)
        values = np.where(den > 1e-12, num / np.maximum(den, 1e-12), 0.0)
        F = F + learning_rate * values[leaves]
        trees.append(tree)
        leaf_values.append(values)
        trace.append(log_loss(y, F))
    return BoostedTrees(base, float(learning_rate), tuple(trees), tuple(leaf_values),
                        np.array(trace))
