import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rainer.dimred import (
    TsneConfig, conditional_affinities, jacobi_eigh, joint_affinities, kl_divergence,
    pca_fit, pca_loadings_report, pca_transform, scree_table, tsne_affinities,
    tsne_embed, tsne_objective,
)
from rainer.errors import (
    CalibrationError, ConstantColumnError, DomainError, NumericError, SchemaError,
)
from rainer.frame import FeatureMatrix
from rainer.models import fit_logistic


def fm(X, names=None):
    X = np.asarray(X, dtype=float)
    names = names or tuple(f"f{j}" for j in range(X.shape[1]))
    return FeatureMatrix(names, X, np.zeros(len(X)))


def correlation(X):
    Z = (X - X.mean(axis=0)) / X.std(axis=0)
    return Z.T @ Z / len(X)


def char_poly_eigenvalues(A):
    """Faddeev-LeVerrier coefficients, polynomial roots, then Newton on det."""
    m = A.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(A)
    c = 1.0
    for k in range(1, m + 1):
        M = A @ M + c * np.eye(m)
        c = -np.trace(A @ M) / k
        coeffs.append(c)
    roots = np.sort(np.real(np.roots(coeffs)))[::-1]
    refined = []
    for lam in roots:
        for _ in range(50):
            B = A - lam * np.eye(m)
            try:
                inv = np.linalg.inv(B)
            except np.linalg.LinAlgError:
                break
            # d/dl det(A - l I) / det = -trace((A - l I)^-1)
            step = -1.0 / np.trace(inv)
            lam -= step
            if abs(step) < 1e-15 * max(1.0, abs(lam)):
                break
        refined.append(lam)
    return np.sort(refined)[::-1]


def null_vector(A, lam):
    _, _, vt = np.linalg.svd(A - lam * np.eye(A.shape[0]))
    return vt[-1]


def exact_rho_data(rho, n=50, seed=0):
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(n, 2))
    Z -= Z.mean(axis=0)
    q, _ = np.linalg.qr(Z)
    q *= np.sqrt(n)
    return np.column_stack([q[:, 0], rho * q[:, 0] + np.sqrt(1 - rho ** 2) * q[:, 1]])


def test_two_feature_closed_form():
    model = pca_fit(fm(exact_rho_data(0.6)))
    np.testing.assert_allclose(model.eigenvalues, [1.6, 0.4], atol=1e-9)
    np.testing.assert_allclose(model.explained_variance_ratio, [0.8, 0.2], atol=1e-9)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(np.abs(model.loadings), [[s, s], [s, s]], atol=1e-9)


def test_collinear_pair():
    x = np.arange(10.0)
    model = pca_fit(fm(np.column_stack([x, 2 * x])))
    np.testing.assert_allclose(model.explained_variance_ratio, [1.0, 0.0], atol=1e-9)


def test_constant_column():
    X = np.column_stack([np.arange(5.0), np.full(5, 3.0)])
    with pytest.raises(ConstantColumnError):
        pca_fit(fm(X))


def test_needs_more_rows_than_features():
    with pytest.raises(DomainError):
        pca_fit(fm(np.eye(3)))


def test_jacobi_rejects_asymmetric():
    with pytest.raises(DomainError):
        jacobi_eigh([[1.0, 2.0], [0.0, 1.0]])


def test_jacobi_reports_non_convergence():
    A = np.array([[1.0, 0.5, 0.2], [0.5, 2.0, 0.3], [0.2, 0.3, 3.0]])
    with pytest.raises(NumericError):
        jacobi_eigh(A, max_sweeps=1, tol=0.0)


@given(st.integers(2, 5), st.integers(0, 10_000))
def test_pca_matches_characteristic_polynomial(m, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, m)) @ rng.normal(size=(m, m))
    model = pca_fit(fm(X))
    R = correlation(X)
    expected = char_poly_eigenvalues(R)
    np.testing.assert_allclose(model.eigenvalues, expected, atol=1e-8)
    gaps = np.abs(np.diff(expected))
    for j in range(m):
        isolated = (j == 0 or gaps[j - 1] > 1e-4) and (j == m - 1 or gaps[j] > 1e-4)
        if isolated:
            v = null_vector(R, expected[j])
            assert abs(abs(v @ model.loadings[:, j]) - 1) < 1e-6


@given(st.integers(1, 6), st.integers(0, 10_000))
def test_pca_invariants(m, seed):
    rng = np.random.default_rng(seed)
    n = 30
    X = rng.normal(size=(n, m)) @ rng.normal(size=(m, m)) + rng.normal(size=m)
    data = fm(X)
    model = pca_fit(data)
    L = model.loadings
    np.testing.assert_allclose(L.T @ L, np.eye(m), atol=1e-8)
    assert np.all(model.eigenvalues >= 0)
    assert np.all(np.diff(model.eigenvalues) <= 1e-12)
    assert abs(model.explained_variance_ratio.sum() - 1) < 1e-8
    for j in range(m):
        lead = np.argmax(np.abs(L[:, j]))
        assert L[lead, j] > 0
    scores = pca_transform(model, data).scores
    Z = (X - X.mean(axis=0)) / X.std(axis=0)
    np.testing.assert_allclose(scores @ L.T, Z, atol=1e-6)
    assert np.all(np.abs(scores.mean(axis=0)) < 1e-8)
    np.testing.assert_allclose(scores.var(axis=0), model.eigenvalues, atol=1e-6)
    cos2 = pca_transform(model, data, 1).cos2
    assert np.all((cos2 >= 0) & (cos2 <= 1))
    if m == 2:
        np.testing.assert_allclose(cos2, 1.0, atol=1e-12)
    for row in pca_loadings_report(model):
        assert set(row) == {"feature", *(f"PC{j + 1}" for j in range(min(2, m)))}
    for j in range(min(2, m)):
        col = np.array([row[f"PC{j + 1}"] for row in pca_loadings_report(model)])
        assert abs((col ** 2).sum() - 1) < 1e-8


def test_mean_point_scores_zero():
    X = np.random.default_rng(1).normal(size=(20, 3))
    model = pca_fit(fm(X))
    out = pca_transform(model, fm(X.mean(axis=0, keepdims=True)))
    np.testing.assert_allclose(out.scores, 0.0, atol=1e-12)
    assert out.cos2[0] == 0.0


def test_single_feature_scores_are_standardized_values():
    x = np.array([[1.0], [2.0], [4.0], [7.0]])
    model = pca_fit(fm(x))
    scores = pca_transform(model, fm(x), 1).scores[:, 0]
    np.testing.assert_allclose(scores, (x[:, 0] - x.mean()) / x.std(), atol=1e-12)


def test_transform_checks_columns():
    X = np.random.default_rng(2).normal(size=(10, 2))
    model = pca_fit(fm(X))
    with pytest.raises(SchemaError):
        pca_transform(model, fm(X, ("a", "b")))
    with pytest.raises(DomainError):
        pca_transform(model, fm(X), 3)


def test_scree_cumulative():
    model = pca_fit(fm(np.random.default_rng(3).normal(size=(30, 4))))
    table = scree_table(model)
    assert [r["component"] for r in table] == [1, 2, 3, 4]
    assert table[-1]["cumulative"] == pytest.approx(1.0)


def perplexity_of(row):
    p = row[row > 0]
    return 2 ** (-(p * np.log2(p)).sum())


@given(st.integers(0, 1000), st.floats(2.0, 12.0))
def test_calibration_hits_target(seed, perplexity):
    X = np.random.default_rng(seed).normal(size=(20, 3))
    P_cond, _, achieved = conditional_affinities(X, perplexity)
    np.testing.assert_allclose(achieved, perplexity, rtol=1e-4)
    for a in range(20):
        assert perplexity_of(P_cond[a]) == pytest.approx(perplexity, rel=1e-3)
        assert P_cond[a, a] == 0


def test_uniform_row_has_perplexity_m_minus_one():
    M = 6
    _, _, achieved = conditional_affinities(np.eye(M), M - 1)
    np.testing.assert_allclose(achieved, M - 1, rtol=1e-12)


def test_unreachable_perplexity_is_a_calibration_error():
    with pytest.raises(CalibrationError):
        conditional_affinities(np.eye(6), 3.0)


def test_perplexity_must_be_below_point_count():
    with pytest.raises(DomainError):
        conditional_affinities(np.eye(5), 5.0)


def test_joint_affinities_properties():
    X = np.random.default_rng(4).normal(size=(15, 4))
    P = tsne_affinities(fm(X), TsneConfig(perplexity=5))
    np.testing.assert_allclose(P, P.T, atol=0)
    assert np.all(np.diag(P) == 0)
    assert abs(P.sum() - 1) < 1e-9


def test_kl_examples():
    assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(np.log(2))
    assert round(kl_divergence([1, 0], [0.5, 0.5]), 4) == 0.6931
    assert kl_divergence([0.2, 0.8], [0.2, 0.8]) == 0.0
    with pytest.raises(DomainError):
        kl_divergence([0.5, 0.5], [1.0, 0.0])
    with pytest.raises(DomainError):
        kl_divergence([1.0], [0.5, 0.5])


@given(st.integers(0, 10_000), st.integers(2, 8))
def test_kl_is_non_negative(seed, k):
    rng = np.random.default_rng(seed)
    p, q = rng.random(k), rng.random(k) + 1e-3
    assert kl_divergence(p / p.sum(), q / q.sum()) >= 0


def test_objective_matches_kl_at_equality():
    Y = np.random.default_rng(5).normal(size=(6, 2))
    from rainer.dimred import student_t_affinities

    Q, _ = student_t_affinities(Y)
    kl, _ = tsne_objective(Q, Y)
    assert abs(kl) < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    P = joint_affinities(conditional_affinities(rng.normal(size=(6, 3)), 3.0)[0])
    Y = rng.normal(size=(6, 2))
    _, grad = tsne_objective(P, Y)
    h = 1e-6
    numeric = np.zeros_like(Y)
    for idx in np.ndindex(*Y.shape):
        up, down = Y.copy(), Y.copy()
        up[idx] += h
        down[idx] -= h
        numeric[idx] = (tsne_objective(P, up)[0] - tsne_objective(P, down)[0]) / (2 * h)
    assert np.linalg.norm(grad - numeric) <= 1e-4 * np.linalg.norm(numeric)


def two_clusters(seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(10, 5))
    b = rng.normal(size=(10, 5)) + 10 * np.sqrt(5) * np.eye(5)[0] * 2
    return np.vstack([a, b]), np.repeat([0, 1], 10)


def test_embedding_separates_clusters_and_descends():
    X, labels = two_clusters()
    P = tsne_affinities(fm(X), TsneConfig(perplexity=5))
    config = TsneConfig(perplexity=5, n_iter=500, seed=3)
    emb = tsne_embed(P, config)
    assert np.all(np.isfinite(emb.Y))
    assert emb.kl >= 0
    tail = emb.kl_trace[len(emb.kl_trace) // 2:]
    assert np.all(np.diff(tail) <= 1e-3)
    clf = fit_logistic(emb.Y, labels, penalty="none", max_iter=5000)
    assert np.array_equal((clf.score(emb.Y) >= 0.5).astype(int), labels)
    again = tsne_embed(P, config)
    assert np.array_equal(emb.Y, again.Y)


def test_embed_rejects_invalid_affinities():
    with pytest.raises(DomainError):
        tsne_embed(np.ones((3, 3)))
