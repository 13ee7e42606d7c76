"""Principal component analysis on the correlation matrix."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConstantColumnError, DomainError, NumericError, SchemaError


def jacobi_eigh(A, tol=1e-15, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` in the input's diagonal order;
    eigenvectors are the columns of the second array.
    """
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("jacobi_eigh needs a square matrix")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise DomainError("jacobi_eigh needs a symmetric matrix")
    A = (A + A.T) / 2
    m = A.shape[0]
    V = np.eye(m)
    scale = max(np.sqrt((A ** 2).sum()), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * (np.triu(A, 1) ** 2).sum())
        if off <= tol * scale:
            return np.diag(A).copy(), V
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = A[p, q]
                if abs(apq) <= np.finfo(float).tiny:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                v_p, v_q = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * v_p - s * v_q
                V[:, q] = s * v_p + c * v_q
    raise NumericError(f"Jacobi rotations did not converge in {max_sweeps} sweeps")


@dataclass(frozen=True)
class PcaModel:
    names: tuple
    means: np.ndarray
    stds: np.ndarray
    loadings: np.ndarray  # m x m, columns are components
    eigenvalues: np.ndarray
    explained_variance_ratio: np.ndarray
    n_obs: int

    @property
    def m(self):
        return len(self.names)

    def cumulative_ratio(self, k):
        return float(self.explained_variance_ratio[:k].sum())


@dataclass(frozen=True)
class PcaScores:
    scores: np.ndarray  # n x k
    cos2: np.ndarray  # n


def standardize(X):
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    return means, stds


def pca_fit(matrix):
    """Fit PCA on the standardized columns of ``matrix``.

    Each component's sign is chosen so that its largest-magnitude loading is
    positive.
    """
    n, m = matrix.X.shape
    if n <= m:
        raise DomainError(f"PCA needs more rows than features (got {n} x {m})")
    means, stds = standardize(matrix.X)
    for name, mu, s in zip(matrix.names, means, stds):
        if s <= 1e-12 * max(1.0, abs(mu)):
            raise ConstantColumnError(name)
    Z = (matrix.X - means) / stds
    R = Z.T @ Z / n
    R = (R + R.T) / 2
    values, vectors = jacobi_eigh(R)
    order = np.argsort(-values, kind="stable")
    values = np.clip(values[order], 0.0, None)
    vectors = vectors[:, order]
    for j in range(m):
        lead = np.argmax(np.abs(vectors[:, j]))
        if vectors[lead, j] < 0:
            vectors[:, j] = -vectors[:, j]
    ratios = values / values.sum()
    return PcaModel(
        names=tuple(matrix.names),
        means=means,
        stds=stds,
        loadings=vectors,
        eigenvalues=values,
        explained_variance_ratio=ratios,
        n_obs=n,
    )


def pca_transform(model, matrix, k=None):
    """Project rows onto the first ``k`` components.

    cos2 is the share of each row's squared standardized norm captured by the
    first two components (0 for a row sitting exactly at the means).
    """
    k = model.m if k is None else k
    if not 1 <= k <= model.m:
        raise DomainError(f"k must be in 1..{model.m}, got {k}")
    if tuple(matrix.names) != model.names:
        raise SchemaError(f"columns {matrix.names} do not match PCA features {model.names}")
    Z = (matrix.X - model.means) / model.stds
    full = Z @ model.loadings
    total = (full ** 2).sum(axis=1)
    top = (full[:, : min(2, model.m)] ** 2).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos2 = np.where(total > 0, top / total, 0.0)
    return PcaScores(scores=full[:, :k], cos2=np.clip(cos2, 0.0, 1.0))


def pca_loadings_report(model, components=2):
    """Per-feature loadings on the leading components, in feature order.

    Loadings are the raw unit-norm eigenvector entries, not scaled by the
    square root of the eigenvalue.
    """
    k = min(components, model.m)
    return [
        {"feature": name, **{f"PC{j + 1}": float(model.loadings[i, j]) for j in range(k)}}
        for i, name in enumerate(model.names)
    ]


def scree_table(model):
    cumulative = np.cumsum(model.explained_variance_ratio)
    return [
        {"component": j + 1, "eigenvalue": float(ev), "ratio": float(r), "cumulative": float(c)}
        for j, (ev, r, c) in enumerate(
            zip(model.eigenvalues, model.explained_variance_ratio, cumulative)
        )
    ]
