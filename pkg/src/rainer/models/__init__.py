"""Classifier zoo behind a uniform fit / predict_scores interface."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import SchemaError, SpecError
from .bayes import NaiveBayesModel, fit_bernoulli_nb
from .boosting import BoostedTrees, fit_gboost
from .kan import Kan, bspline_basis, fit_kan, init_kan, kan_forward_backward
from .knn import KnnModel, fit_knn, knn_score, minkowski
from .linear import LinearModel, fit_lda, fit_logistic, fit_ols, log_loss, sigmoid
from .mlp import Mlp, fit_mlp, init_mlp, mlp_forward_backward
from .tree import (Forest, Split, Tree, best_split, bootstrap_rows, fit_forest, fit_tree,
                   gini_impurity, tree_rng)

__all__ = [
    "ALGORITHMS", "BoostedTrees", "Forest", "Kan", "KnnModel", "LinearModel", "Mlp",
    "ModelSpec", "NaiveBayesModel", "REGISTRY", "Split", "TrainedModel", "Tree",
    "best_split", "bootstrap_rows", "bspline_basis", "fit", "fit_bernoulli_nb",
    "fit_forest", "fit_gboost", "fit_kan", "fit_knn", "fit_lda", "fit_logistic", "fit_mlp",
    "fit_ols", "fit_tree", "gini_impurity", "init_kan", "init_mlp", "kan_forward_backward",
    "knn_score", "log_loss", "minkowski", "mlp_forward_backward", "predict_labels",
    "predict_scores", "sigmoid", "tree_rng",
]

# Hyperparameter names and defaults per algorithm; the defaults are the tuned
# settings used for the reference runs. Names are accepted verbatim.
REGISTRY = {
    "lda": {"solver": "svd", "shrinkage": None, "n_components": None,
            "store_covariance": False, "tol": 1e-4},
    "linear_regression": {"fit_intercept": True, "normalize": False, "copy_X": True,
                          "n_jobs": None},
    "lasso": {"C": 500.0, "penalty": "l_1", "solver": "liblinear", "max_iter": 1000},
    "elasticnet": {"C": 100.0, "l1_ratio": 0.001, "max_iter": 1000},
    # n_estimators has no effect on a single logistic model; kept for config parity
    "lr": {"estimator_C": 10.0, "estimator_max_iter": 1000, "n_estimators": 50,
           "penalty": "l2"},
    "dt": {"criterion": "gini", "max_depth": 40, "max_features": "sqrt",
           "min_samples_leaf": 1, "min_samples_split": 2},
    "rf": {"n_estimators": 100, "max_depth": None, "max_features": "sqrt",
           "min_samples_leaf": 1, "min_samples_split": 2, "bootstrap": True},
    "gb": {"n_estimators": 100, "learning_rate": 0.1, "max_depth": 3},
    "nb": {"alpha": 0.1, "binarize": 0.0},
    "knn": {"n_neighbors": 100, "p": 1, "weight": "distance"},
    "mlp": {"learning_rate": 0.001, "hidden_sizes": [128, 64, 32], "activation": "tanh",
            "alpha": 0.001, "batch_size": 200, "epochs": 20},
    "kan": {"learning_rate": 0.001, "Q": 2, "hidden_dim": 64, "activation": "relu",
            "grid_size": 8, "batch_size": 200, "epochs": 20},
}

ALGORITHMS = tuple(REGISTRY)


def _check_choice(algorithm, name, value, choices):
    if value not in choices:
        raise SpecError(f"{algorithm}: {name}={value!r} is not one of {choices}")


def _check_positive(algorithm, name, value, integer=False, allow_none=False):
    if value is None and allow_none:
        return
    kind = (int, np.integer) if integer else (int, float, np.integer, np.floating)
    if isinstance(value, bool) or not isinstance(value, kind) or not value > 0:
        raise SpecError(f"{algorithm}: {name} must be a positive "
                        f"{'integer' if integer else 'number'}, got {value!r}")


def _validate(algorithm, p):
    a = algorithm
    if a == "lda":
        _check_choice(a, "solver", p["solver"], ("svd",))
        _check_choice(a, "shrinkage", p["shrinkage"], (None,))
    elif a == "lasso":
        _check_positive(a, "C", p["C"])
        _check_choice(a, "penalty", p["penalty"], ("l_1", "l1"))
        _check_positive(a, "max_iter", p["max_iter"], integer=True)
    elif a == "elasticnet":
        _check_positive(a, "C", p["C"])
        _check_positive(a, "max_iter", p["max_iter"], integer=True)
        if not 0 <= p["l1_ratio"] <= 1:
            raise SpecError(f"elasticnet: l1_ratio must be in [0, 1], got {p['l1_ratio']!r}")
    elif a == "lr":
        _check_positive(a, "estimator_C", p["estimator_C"])
        _check_positive(a, "estimator_max_iter", p["estimator_max_iter"], integer=True)
        _check_choice(a, "penalty", p["penalty"], ("l2", "l_2", "none"))
    elif a in ("dt", "rf"):
        _check_positive(a, "max_depth", p["max_depth"], integer=True, allow_none=True)
        _check_positive(a, "min_samples_leaf", p["min_samples_leaf"], integer=True)
        if not isinstance(p["min_samples_split"], (int, np.integer)) or p["min_samples_split"] < 2:
            raise SpecError(f"{a}: min_samples_split must be an integer >= 2")
        if a == "dt":
            _check_choice(a, "criterion", p["criterion"], ("gini",))
        else:
            _check_positive(a, "n_estimators", p["n_estimators"], integer=True)
    elif a == "gb":
        _check_positive(a, "n_estimators", p["n_estimators"], integer=True)
        _check_positive(a, "max_depth", p["max_depth"], integer=True)
        if not p["learning_rate"] >= 0:
            raise SpecError("gb: learning_rate must be non-negative")
    elif a == "nb":
        _check_positive(a, "alpha", p["alpha"])
    elif a == "knn":
        _check_positive(a, "n_neighbors", p["n_neighbors"], integer=True)
        if not p["p"] >= 1:
            raise SpecError(f"knn: p must be >= 1, got {p['p']!r}")
        _check_choice(a, "weight", p["weight"], ("uniform", "distance"))
    elif a == "mlp":
        _check_positive(a, "learning_rate", p["learning_rate"])
        _check_choice(a, "activation", p["activation"], ("tanh", "relu", "logistic", "identity"))
        for width in p["hidden_sizes"]:
            _check_positive(a, "hidden_sizes", width, integer=True)
        _check_positive(a, "batch_size", p["batch_size"], integer=True)
        _check_positive(a, "epochs", p["epochs"], integer=True)
        if p["alpha"] < 0:
            raise SpecError("mlp: alpha must be non-negative")
    elif a == "kan":
        _check_positive(a, "learning_rate", p["learning_rate"])
        _check_positive(a, "Q", p["Q"], integer=True)
        _check_positive(a, "hidden_dim", p["hidden_dim"], integer=True)
        _check_positive(a, "grid_size", p["grid_size"], integer=True)
        _check_choice(a, "activation", p["activation"], ("relu", "silu"))
        _check_positive(a, "batch_size", p["batch_size"], integer=True)
        _check_positive(a, "epochs", p["epochs"], integer=True)


@dataclass(frozen=True)
class ModelSpec:
    algorithm: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in REGISTRY:
            raise SpecError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        defaults = REGISTRY[self.algorithm]
        unknown = sorted(set(self.params) - set(defaults))
        if unknown:
            raise SpecError(f"{self.algorithm}: unknown hyperparameter(s) {unknown}; "
                            f"accepted: {sorted(defaults)}")
        merged = {**defaults, **self.params}
        _validate(self.algorithm, merged)
        object.__setattr__(self, "params", merged)

    def with_params(self, **params):
        return ModelSpec(self.algorithm, {**self.params, **params}, self.seed)


@dataclass(frozen=True)
class TrainedModel:
    algorithm: str
    estimator: object
    feature_names: tuple
    metadata: dict = field(default_factory=dict)


def _fit_estimator(spec, X, y, threads):
    p, a = spec.params, spec.algorithm
    if a == "lda":
        return fit_lda(X, y), {}
    if a == "linear_regression":
        return fit_ols(X, y, fit_intercept=bool(p["fit_intercept"])), {}
    if a in ("lasso", "elasticnet", "lr"):
        if a == "lasso":
            kw = dict(penalty="l1", C=p["C"], max_iter=p["max_iter"])
        elif a == "elasticnet":
            kw = dict(penalty="elastic", C=p["C"], l1_ratio=p["l1_ratio"], max_iter=p["max_iter"])
        else:
            kw = dict(penalty=p["penalty"], C=p["estimator_C"], max_iter=p["estimator_max_iter"])
        model = fit_logistic(X, y, **kw)
        return model, {"iterations": model.n_iter, "converged": model.converged,
                       "final_loss": log_loss(y, model.decision(X))}
    if a == "dt":
        tree = fit_tree(X, y, p["max_depth"], p["min_samples_split"], p["min_samples_leaf"],
                        p["max_features"], "gini", tree_rng(spec.seed, 0))
        return tree, {"nodes": tree.n_nodes, "depth": tree.depth}
    if a == "rf":
        forest = fit_forest(X, y, p["n_estimators"], p["max_depth"], p["min_samples_split"],
                            p["min_samples_leaf"], p["max_features"], bool(p["bootstrap"]),
                            spec.seed, threads)
        return forest, {"trees": len(forest.trees)}
    if a == "gb":
        model = fit_gboost(X, y, p["n_estimators"], p["learning_rate"], p["max_depth"])
        return model, {"iterations": len(model.trees), "final_loss": float(model.loss_trace[-1])}
    if a == "nb":
        return fit_bernoulli_nb(X, y, p["alpha"], p["binarize"]), {}
    if a == "knn":
        return fit_knn(X, y, p["n_neighbors"], p["p"], p["weight"]), {}
    if a == "mlp":
        net, trace = fit_mlp(X, y, tuple(p["hidden_sizes"]), p["activation"], p["alpha"],
                             p["learning_rate"], p["batch_size"], p["epochs"], seed=spec.seed)
        return net, {"iterations": len(trace), "final_loss": float(trace[-1])}
    net, trace = fit_kan(X, y, p["hidden_dim"], p["Q"], p["grid_size"], p["activation"],
                         p["learning_rate"], p["batch_size"], p["epochs"], seed=spec.seed)
    return net, {"iterations": len(trace), "final_loss": float(trace[-1])}


def fit(spec, train, threads=1):
    """Fit ``spec`` on a FeatureMatrix; deterministic for a fixed seed."""
    if train.n_rows == 0:
        raise SpecError("cannot fit on an empty training matrix")
    estimator, metadata = _fit_estimator(spec, train.X, train.y.astype(np.float64), threads)
    return TrainedModel(spec.algorithm, estimator, tuple(train.names), metadata)


def predict_scores(model, matrix):
    if tuple(matrix.names) != model.feature_names:
        raise SchemaError(f"model was fitted on {list(model.feature_names)}, "
                          f"got {list(matrix.names)}")
    return np.clip(model.estimator.score(matrix.X), 0.0, 1.0)


def predict_labels(model, matrix):
    return (predict_scores(model, matrix) >= 0.5).astype(np.int64)
