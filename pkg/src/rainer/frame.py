"""Dense numeric observation-by-feature matrix with an aligned label vector."""

from dataclasses import dataclass

import numpy as np

from .errors import SchemaError


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    names: tuple
    X: np.ndarray
    y: np.ndarray
    row_ids: np.ndarray = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        y = np.asarray(self.y).astype(np.int64)
        names = tuple(self.names)
        if X.shape[1] != len(names):
            raise SchemaError(f"{len(names)} names for {X.shape[1]} columns")
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate feature names in {names}")
        if y.shape != (X.shape[0],):
            raise SchemaError(f"label vector of shape {y.shape} for {X.shape[0]} rows")
        if np.isnan(X).any():
            raise SchemaError("feature matrix contains missing entries")
        row_ids = np.arange(X.shape[0]) if self.row_ids is None else np.asarray(self.row_ids)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "row_ids", row_ids)

    @property
    def n_rows(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"no feature named {name!r}") from None

    def column(self, name):
        return self.X[:, self.index(name)]

    def select(self, names):
        idx = [self.index(n) for n in names]
        return FeatureMatrix(tuple(names), self.X[:, idx], self.y, self.row_ids)

    def drop(self, names):
        drop = set(names)
        return self.select([n for n in self.names if n not in drop])

    def take(self, rows):
        rows = np.asarray(rows)
        return FeatureMatrix(self.names, self.X[rows], self.y[rows], self.row_ids[rows])

    def with_columns(self, names, values):
        """Append columns (``values`` is rows x len(names))."""
        values = np.asarray(values, dtype=np.float64).reshape(self.n_rows, len(names))
        return FeatureMatrix(
            self.names + tuple(names), np.hstack([self.X, values]), self.y, self.row_ids
        )

    def rename(self, mapping):
        return FeatureMatrix(
            tuple(mapping.get(n, n) for n in self.names), self.X, self.y, self.row_ids
        )

    def class_counts(self):
        return int((self.y == 0).sum()), int((self.y == 1).sum())
