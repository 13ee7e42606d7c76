"""Distance-weighted k-nearest neighbours."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import SpecError

_CHUNK = 256
_METRIC = {1: "cityblock", 2: "euclidean"}


def minkowski(a, b, p):
    return float(cdist(np.atleast_2d(a), np.atleast_2d(b), "minkowski", p=p)[0, 0])


def knn_score(train_X, train_y, query, n_neighbors=5, p=2, weight="uniform"):
    """Share of class 1 among the ``n_neighbors`` nearest training rows.

    With ``weight="distance"`` each neighbour counts ``1/d``; a query at zero
    distance from any training row takes the mean label of those rows.
    Neighbour ties at the k-th distance resolve to the lower training index.
    """
    train_X = np.asarray(train_X, dtype=np.float64)
    train_y = np.asarray(train_y, dtype=np.float64)
    query = np.atleast_2d(np.asarray(query, dtype=np.float64))
    n = len(train_X)
    if not 1 <= n_neighbors <= n:
        raise SpecError(f"n_neighbors={n_neighbors} must be in 1..{n} (training rows)")
    if weight not in ("uniform", "distance"):
        raise SpecError(f"unknown weight {weight!r}")
    if not p >= 1:
        raise SpecError("Minkowski p must be >= 1")
    out = np.empty(len(query))
    for start in range(0, len(query), _CHUNK):
        block = query[start:start + _CHUNK]
        if p in _METRIC:
            D = cdist(block, train_X, _METRIC[p])
        else:
            D = cdist(block, train_X, "minkowski", p=p)
        if n_neighbors < n:
            # stable order: distance, then training index
            part = np.argpartition(D, n_neighbors - 1, axis=1)[:, :n_neighbors]
            kth = np.take_along_axis(D, part, axis=1).max(axis=1)
            idx = np.sort(part, axis=1)
            # only rows with ties straddling the k-th distance need resolving
            crowded = np.flatnonzero((D <= kth[:, None]).sum(axis=1) > n_neighbors)
            for r in crowded:
                strictly = np.flatnonzero(D[r] < kth[r])
                tied = np.flatnonzero(D[r] == kth[r])[: n_neighbors - len(strictly)]
                idx[r] = np.concatenate([strictly, tied])
        else:
            idx = np.broadcast_to(np.arange(n), D.shape)
        d = np.take_along_axis(D, idx, axis=1)
        labels = train_y[idx]
        if weight == "uniform":
            scores = labels.mean(axis=1)
        else:
            exact = d == 0
            has_exact = exact.any(axis=1)
            with np.errstate(divide="ignore"):
                w = np.where(exact, 0.0, 1.0 / d)
            scores = np.empty(len(d))
            far = ~has_exact
            scores[far] = (w[far] * labels[far]).sum(axis=1) / w[far].sum(axis=1)
            if has_exact.any():
                e = exact[has_exact]
                scores[has_exact] = (labels[has_exact] * e).sum(axis=1) / e.sum(axis=1)
        out[start:start + _CHUNK] = scores
    return out


@dataclass(frozen=True)
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    n_neighbors: int
    p: float
    weight: str

    def score(self, X):
        return knn_score(self.X, self.y, X, self.n_neighbors, self.p, self.weight)


def fit_knn(X, y, n_neighbors=5, p=2, weight="uniform"):
    X = np.asarray(X, dtype=np.float64)
    if not 1 <= n_neighbors <= len(X):
        raise SpecError(f"n_neighbors={n_neighbors} exceeds the {len(X)} training rows")
    if weight not in ("uniform", "distance"):
        raise SpecError(f"unknown weight {weight!r}")
    return KnnModel(X.copy(), np.asarray(y, dtype=np.float64).copy(), int(n_neighbors),
                    float(p), weight)
