import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rainer.errors import DomainError, SchemaError, SpecError
from rainer.frame import FeatureMatrix
from rainer.models import (
    REGISTRY, Forest, Kan, ModelSpec, best_split, bspline_basis, fit,
    fit_bernoulli_nb, fit_forest, fit_gboost, fit_kan, fit_lda, fit_logistic, fit_mlp,
    fit_ols, fit_tree, gini_impurity, init_kan, init_mlp, kan_forward_backward, knn_score,
    minkowski, mlp_forward_backward, predict_labels, predict_scores, sigmoid,
)
from rainer.models.linear import LinearModel
from rainer.models.kan import KanLayer
from rainer.models.mlp import Mlp


def fm(X, y, names=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return FeatureMatrix(names or tuple(f"f{j}" for j in range(X.shape[1])), X, y)


def random_task(seed=0, n=120, m=5):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, m))
    y = (X[:, 0] + 0.5 * X[:, 1] + 0.3 * rng.normal(size=n) > 0).astype(int)
    return fm(X, y)


# trees

def test_gini_examples():
    assert gini_impurity([5, 5]) == 0.5
    assert gini_impurity([10, 0]) == 0.0
    assert gini_impurity([3, 1]) == 0.375
    with pytest.raises(DomainError):
        gini_impurity([0, 0])


def split_oracle(x, y):
    """Enumerate every midpoint of a 1-D feature; return (threshold, decrease)."""
    def gini(labels):
        p = Fraction(sum(labels), len(labels))
        return 1 - p * p - (1 - p) * (1 - p)

    n = len(y)
    values = sorted(set(x))
    best = None
    for lo, hi in zip(values, values[1:]):
        t = (lo + hi) / 2
        left = [b for a, b in zip(x, y) if a <= t]
        right = [b for a, b in zip(x, y) if a > t]
        dec = gini(y) - Fraction(len(left), n) * gini(left) - Fraction(len(right), n) * gini(right)
        if best is None or dec > best[1]:
            best = (t, dec)
    return best


def test_best_split_example():
    split = best_split(np.array([[0.0], [1.0], [2.0], [3.0]]), np.array([0, 0, 1, 1]))
    assert (split.feature, split.threshold) == (0, 1.5)
    assert split.decrease == pytest.approx(0.5, abs=1e-12)
    t, dec = split_oracle([0, 1, 2, 3], [0, 0, 1, 1])
    assert (t, dec) == (1.5, Fraction(1, 2))


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 1)), min_size=2, max_size=12))
def test_best_split_matches_enumeration(rows):
    x = [a for a, _ in rows]
    y = [b for _, b in rows]
    split = best_split(np.array(x, dtype=float)[:, None], np.array(y))
    oracle = split_oracle(x, y)
    if oracle is None or oracle[1] <= 0:
        assert split is None
    else:
        assert split.threshold == oracle[0]
        assert split.decrease == pytest.approx(float(oracle[1]), abs=1e-12)


def test_pure_node_has_no_split():
    assert best_split(np.array([[0.0], [1.0]]), np.array([1, 1])) is None


def test_xor_has_no_improving_split():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0])
    assert best_split(X, y) is None
    for j in range(2):
        left, right = y[X[:, j] <= 0.5], y[X[:, j] > 0.5]
        assert gini_impurity(np.bincount(left, minlength=2)) == 0.5
        assert gini_impurity(np.bincount(right, minlength=2)) == 0.5


def test_split_ties_go_to_lowest_feature():
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert best_split(X, np.array([0, 1])).feature == 0


def test_unknown_criterion():
    with pytest.raises(SpecError):
        best_split(np.zeros((2, 1)), np.array([0, 1]), criterion="entropy")


def test_single_class_tree_is_constant():
    data = fm(np.random.default_rng(0).normal(size=(20, 3)), np.ones(20))
    model = fit(ModelSpec("dt"), data)
    assert np.all(predict_scores(model, data) == 1.0)


def test_unbounded_tree_fits_training_data():
    data = random_task(1)
    spec = ModelSpec("dt", {"max_depth": None, "max_features": None})
    model = fit(spec, data)
    assert np.array_equal(predict_labels(model, data), data.y)


def test_single_unbootstrapped_forest_equals_tree():
    data = random_task(2)
    common = {"max_depth": None, "max_features": "sqrt"}
    dt = fit(ModelSpec("dt", common, seed=5), data)
    rf = fit(ModelSpec("rf", {**common, "n_estimators": 1, "bootstrap": False}, seed=5), data)
    assert np.array_equal(predict_scores(dt, data), predict_scores(rf, data))


def test_forest_tree_order_does_not_matter():
    data = random_task(3)
    forest = fit_forest(data.X, data.y, n_estimators=7, max_depth=4, seed=1)
    shuffled = Forest(tuple(forest.trees[i] for i in [3, 6, 0, 5, 1, 4, 2]))
    assert np.array_equal(forest.score(data.X), shuffled.score(data.X))


def test_forest_is_thread_independent():
    data = random_task(4)
    a = fit_forest(data.X, data.y, n_estimators=6, seed=3, threads=1)
    b = fit_forest(data.X, data.y, n_estimators=6, seed=3, threads=3)
    assert np.array_equal(a.score(data.X), b.score(data.X))


def test_tree_parameter_errors():
    X, y = np.zeros((4, 1)), np.array([0, 1, 0, 1])
    with pytest.raises(SpecError):
        fit_tree(X, y, max_depth=0)
    with pytest.raises(SpecError):
        fit_tree(X, y, min_samples_split=1)


# linear family

def test_separable_logistic():
    x = np.array([-3.0, -2.0, -1.0, 1.0, 2.0, 3.0])
    y = np.array([0, 0, 0, 1, 1, 1])
    model = fit_logistic(x[:, None], y, penalty="none", max_iter=5000)
    assert np.array_equal((model.score(x[:, None]) >= 0.5).astype(int), y)


def test_tiny_c_gives_the_positive_rate():
    data = random_task(5)
    model = fit_logistic(data.X, data.y, penalty="l1", C=1e-4, max_iter=20000)
    assert np.all(model.coef == 0)
    assert abs(sigmoid(np.array([model.intercept]))[0] - data.y.mean()) < 1e-3


def test_label_independent_feature_gets_zero_weight():
    x = np.array([-2.0, -1.0, 1.0, 2.0])
    X = np.vstack([np.column_stack([x, np.full(4, s)]) for s in (-1.0, 1.0)])
    y = np.tile([0, 0, 1, 1], 2)
    model = fit_logistic(X, y, penalty="l2", C=10.0, max_iter=20000, tol=1e-10)
    assert abs(model.coef[1]) < 1e-4


def test_l1_sparsity_grows_as_c_shrinks():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(200, 12))
    y = (X[:, :3].sum(axis=1) + rng.normal(size=200) > 0).astype(int)
    zeros = [int((fit_logistic(X, y, "l1", C, max_iter=5000).coef == 0).sum())
             for C in (100.0, 1.0, 0.01)]
    assert zeros == sorted(zeros)
    assert zeros[-1] == 12


def test_unknown_penalty():
    with pytest.raises(SpecError):
        fit_logistic(np.zeros((2, 1)), np.array([0, 1]), penalty="l3")


def test_zero_logistic_model_scores_half():
    model = LinearModel(0.0, np.zeros(3))
    assert np.all(model.score(np.random.default_rng(0).normal(size=(5, 3))) == 0.5)


def test_ols_interpolation():
    data = fm([[0.0], [1.0]], [0, 1])
    model = fit(ModelSpec("linear_regression"), data)
    assert predict_scores(model, fm([[1.0]], [1]))[0] == pytest.approx(1.0)
    assert predict_labels(model, fm([[1.0]], [1]))[0] == 1
    assert np.all(fit_ols([[0.0], [1.0]], [0, 1]).score(np.array([[5.0]])) == 1.0)


def test_lda_symmetric_boundary():
    x = np.array([-2.0, -1.0, 0.0, 0.0, 1.0, 2.0])
    model = fit_lda(x[:, None], [0, 0, 0, 1, 1, 1])
    assert abs(model.decision(np.array([[0.0]]))[0]) < 1e-6


def test_lda_identical_means():
    X = np.array([[1.0], [-1.0], [2.0], [-2.0]])
    assert fit_lda(X, [0, 0, 1, 1]).coef[0] == 0.0


def test_lda_ignores_uninformative_feature():
    e = np.array([1.0, -1.0, 1.0, -1.0])
    s = np.array([1.0, 1.0, -1.0, -1.0])
    X = np.vstack([np.column_stack([-1 + e, s]), np.column_stack([1 + e, s])])
    model = fit_lda(X, [0] * 4 + [1] * 4)
    assert abs(model.coef[1]) < 1e-6
    assert model.coef[0] > 0


# boosting

def test_single_stump_orders_scores():
    x = np.arange(8.0)[:, None]
    y = (x[:, 0] >= 4).astype(int)
    model = fit_gboost(x, y, n_stages=1, learning_rate=0.5, max_depth=1)
    s = model.score(x)
    assert s[y == 1].min() > s[y == 0].max()


def test_boosting_loss_never_increases():
    data = random_task(7)
    model = fit_gboost(data.X, data.y, n_stages=30, learning_rate=0.1, max_depth=2)
    assert np.all(np.diff(model.loss_trace) <= 1e-9)


def test_zero_learning_rate_is_constant():
    data = random_task(8)
    model = fit_gboost(data.X, data.y, n_stages=3, learning_rate=0.0)
    s = model.score(data.X)
    assert np.all(s == sigmoid(np.array([model.base_logit]))[0])
    assert s[0] == pytest.approx(data.y.mean())


# naive Bayes

def test_symmetric_posterior_is_half():
    model = fit_bernoulli_nb(np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([0, 1]), alpha=1.0)
    assert abs(model.score(np.zeros((1, 2)))[0] - 0.5) < 1e-12


def test_priors_from_counts_and_smoothing():
    X = np.array([[1.0], [1.0], [1.0], [1.0]])
    model = fit_bernoulli_nb(X, np.array([1, 1, 1, 0]), alpha=0.1)
    assert model.priors[1] == pytest.approx(0.75)
    assert np.all((model.likelihoods > 0) & (model.likelihoods < 1))
    assert 0 < model.score(np.array([[0.0]]))[0] < 1


def test_nb_alpha_must_be_positive():
    with pytest.raises(SpecError):
        fit_bernoulli_nb(np.zeros((2, 1)), np.array([0, 1]), alpha=0.0)


def nb_oracle(X, y, query, alpha):
    """Exact rational posterior P(1 | query) from counts."""
    alpha = Fraction(alpha)
    joint = []
    for c in (0, 1):
        rows = [x for x, label in zip(X, y) if label == c]
        value = Fraction(len(rows), len(X))
        for j, q in enumerate(query):
            ones = sum(1 for x in rows if x[j] == 1)
            p1 = (ones + alpha) / (len(rows) + 2 * alpha)
            value *= p1 if q == 1 else 1 - p1
        joint.append(value)
    return joint[1] / (joint[0] + joint[1])


@given(st.integers(1, 2).flatmap(lambda m: st.tuples(
    st.lists(st.tuples(st.tuples(*[st.integers(0, 1)] * m), st.integers(0, 1)),
             min_size=2, max_size=8),
    st.sampled_from([0.1, 0.5, 1.0, 2.0]),
)))
def test_nb_matches_enumeration(case):
    rows, alpha = case
    X = [list(x) for x, _ in rows]
    y = [c for _, c in rows]
    if len(set(y)) < 2:
        return
    model = fit_bernoulli_nb(np.array(X, dtype=float), np.array(y), alpha=alpha)
    m = len(X[0])
    for query in itertools.product((0, 1), repeat=m):
        expected = float(nb_oracle(X, y, query, alpha))
        assert abs(model.score(np.array([query], dtype=float))[0] - expected) < 1e-12


# nearest neighbours

def test_manhattan_distance():
    assert minkowski([0, 0], [1, 2], 1) == 3.0


def test_knn_weighted_example():
    train = np.array([[1.0], [-1.0], [2.0], [5.0]])
    score = knn_score(train, [1, 1, 0, 0], [[0.0]], n_neighbors=3, p=1, weight="distance")
    assert score[0] == pytest.approx(0.8)


def test_knn_exact_match():
    train = np.array([[0.0, 0.0], [1.0, 1.0], [3.0, 3.0]])
    y = [1, 0, 0]
    for k in (1, 3):
        assert knn_score(train, y, [[0.0, 0.0]], n_neighbors=k, p=1, weight="distance")[0] == 1.0
    assert knn_score(train, y, [[1.0, 1.0]], n_neighbors=1)[0] == 0.0


def test_knn_tie_prefers_lower_index():
    train = np.array([[-1.0], [1.0], [1.0]])
    assert knn_score(train, [1, 0, 0], [[0.0]], n_neighbors=1)[0] == 1.0


def test_knn_too_many_neighbours():
    data = random_task(9, n=50)
    with pytest.raises(SpecError):
        fit(ModelSpec("knn", {"n_neighbors": 100}), data)


# neural nets

def test_zero_mlp_scores_half():
    net = init_mlp(3, (4,), "tanh")
    zero = Mlp(tuple(np.zeros_like(w) for w in net.weights),
               tuple(np.zeros_like(b) for b in net.biases), "tanh")
    assert np.all(zero.score(np.random.default_rng(0).normal(size=(5, 3))) == 0.5)


def finite_difference(params, loss_of, h=1e-6):
    out = []
    for p in params:
        g = np.zeros_like(p)
        for idx in np.ndindex(*p.shape):
            old = p[idx]
            p[idx] = old + h
            up = loss_of()
            p[idx] = old - h
            down = loss_of()
            p[idx] = old
            g[idx] = (up - down) / (2 * h)
        out.append(g)
    return out


def relative_error(a, b):
    a = np.concatenate([x.ravel() for x in a])
    b = np.concatenate([x.ravel() for x in b])
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.mark.parametrize("activation", ["tanh", "logistic"])
def test_mlp_gradient(activation):
    rng = np.random.default_rng(1)
    X, y = rng.normal(size=(7, 4)), rng.integers(0, 2, 7)
    net = init_mlp(4, (2,), activation, seed=2)
    params = [p.copy() for p in net.params]
    for b in params[1::2]:
        b += rng.normal(size=b.shape)

    def loss_of():
        return mlp_forward_backward(Mlp.from_params(params, activation), X, y, 0.3).loss

    analytic = mlp_forward_backward(Mlp.from_params(params, activation), X, y, 0.3).grads
    assert relative_error(analytic, finite_difference(params, loss_of)) < 1e-4


def test_mlp_learns_xor():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0])
    for seed in range(3):
        net, trace = fit_mlp(X, y, (8,), "tanh", alpha=0.0, learning_rate=0.1,
                             batch_size=4, epochs=5000, seed=seed)
        assert len(trace) <= 5000
        assert np.array_equal((net.score(X) >= 0.5).astype(int), y)


def test_mlp_shape_mismatch():
    with pytest.raises(SpecError):
        mlp_forward_backward(init_mlp(3, (2,)), np.zeros((1, 4)))


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=30), st.integers(1, 10), st.integers(0, 4))
def test_partition_of_unity(xs, grid, degree):
    B, _ = bspline_basis(np.array(xs), grid, degree)
    assert np.all(B >= 0)
    np.testing.assert_allclose(B.sum(axis=-1), 1.0, atol=1e-12)


def test_basis_domain():
    with pytest.raises(SpecError):
        bspline_basis(np.array([1.5]))


def test_zero_kan_scores_half():
    net = init_kan([3, 4, 1])
    zero = Kan(tuple(KanLayer(np.zeros_like(l.base_w), np.zeros_like(l.coef)) for l in net.layers))
    assert np.all(zero.score(np.random.default_rng(0).uniform(-1, 1, (6, 3))) == 0.5)


@pytest.mark.parametrize("activation", ["silu", "relu"])
@pytest.mark.parametrize("loss", ["logloss", "mse"])
def test_kan_gradient(activation, loss):
    rng = np.random.default_rng(3)
    X, y = rng.uniform(-0.9, 0.9, size=(6, 3)), rng.integers(0, 2, 6)
    net = init_kan([3, 4, 1], activation=activation, seed=4)
    params = [p.copy() for p in net.params]

    def loss_of():
        return kan_forward_backward(net.with_params(params), X, y, loss).loss

    analytic = kan_forward_backward(net.with_params(params), X, y, loss).grads
    assert relative_error(analytic, finite_difference(params, loss_of)) < 1e-4


def test_kan_fits_sine():
    x = np.linspace(-1, 1, 64)[:, None]
    y = np.sin(np.pi * x[:, 0])
    net, trace = fit_kan(x, y, hidden_dim=4, Q=2, learning_rate=0.05, batch_size=64,
                         epochs=2000, loss="mse", scale_inputs=False)
    assert len(trace) == 2000
    out = kan_forward_backward(net, x, y, "mse")
    assert out.loss < 1e-2


# uniform interface

def test_unknown_algorithm_and_parameter():
    with pytest.raises(SpecError):
        ModelSpec("svm")
    with pytest.raises(SpecError):
        ModelSpec("dt", {"max_leaf_nodes": 4})
    with pytest.raises(SpecError):
        ModelSpec("knn", {"weight": "gaussian"})


def test_defaults_merge():
    spec = ModelSpec("nb", {"alpha": 0.5})
    assert spec.params == {"alpha": 0.5, "binarize": 0.0}
    assert set(REGISTRY["kan"]) >= {"learning_rate", "Q", "hidden_dim", "activation"}


def test_feature_names_must_match():
    data = random_task(10)
    model = fit(ModelSpec("nb"), data)
    with pytest.raises(SchemaError):
        predict_scores(model, data.rename({"f0": "g0"}))


FAST = {
    "lda": {}, "linear_regression": {}, "lasso": {}, "elasticnet": {}, "lr": {},
    "dt": {}, "rf": {"n_estimators": 5}, "gb": {"n_estimators": 5}, "nb": {},
    "knn": {"n_neighbors": 7},
    "mlp": {"hidden_sizes": [6], "epochs": 3, "batch_size": 32},
    "kan": {"hidden_dim": 3, "epochs": 3, "batch_size": 32},
}


@pytest.mark.parametrize("algorithm", sorted(FAST))
def test_every_algorithm_is_bounded_and_deterministic(algorithm):
    data = random_task(11)
    spec = ModelSpec(algorithm, FAST[algorithm], seed=4)
    a, b = fit(spec, data), fit(spec, data)
    sa, sb = predict_scores(a, data), predict_scores(b, data)
    assert np.array_equal(sa, sb)
    assert np.all((sa >= 0) & (sa <= 1))
    assert np.array_equal(predict_labels(a, data), (sa >= 0.5).astype(int))
