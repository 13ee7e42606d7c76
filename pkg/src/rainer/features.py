"""Constructed features, correlation analysis and feature-set strategies."""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ConstantColumnError, DomainError, SchemaError
from .frame import FeatureMatrix

# The 17 meteorological features used for PCA and the "original" strategy.
ORIGINAL_FEATURES = (
    "Location", "MinTemp", "MaxTemp", "Rainfall", "WindGustDir", "WindGustSpeed",
    "WindDir9am", "WindDir3pm", "WindSpeed9am", "WindSpeed3pm", "Humidity9am",
    "Humidity3pm", "Pressure9am", "Pressure3pm", "Temp9am", "Temp3pm", "RainToday",
)

# Sources for the selected + constructed set: the 17 above with RainToday as
# its two indicators, plus Month.
SELECTED_FEATURES = (
    "Location", "Month", "MinTemp", "MaxTemp", "Rainfall", "WindGustDir",
    "WindGustSpeed", "WindDir9am", "WindDir3pm", "WindSpeed9am", "WindSpeed3pm",
    "Humidity9am", "Humidity3pm", "Pressure9am", "Pressure3pm", "Temp9am",
    "Temp3pm", "RainToday_0", "RainToday_1",
)

DIFF_SOURCES = ("MaxTemp", "MinTemp", "Humidity9am", "Humidity3pm")


class FeatureStrategy(enum.Enum):
    ORIGINAL = "original"
    SELECTED_CONSTRUCTED = "selected_constructed"
    SELECTED_CONSTRUCTED_PC2 = "selected_constructed_pc2"
    SELECTED_CONSTRUCTED_PC8 = "selected_constructed_pc8"

    @property
    def n_components(self):
        return {"selected_constructed_pc2": 2, "selected_constructed_pc8": 8}.get(self.value, 0)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ConfigurationError(f"unknown feature strategy {value!r}") from None


@dataclass(frozen=True)
class CorrelationMatrix:
    names: tuple
    values: np.ndarray

    def __getitem__(self, pair):
        a, b = pair
        return self.values[self.names.index(a), self.names.index(b)]


def construct_diffs(matrix):
    """Replace the temperature and humidity pairs by their differences."""
    for name in DIFF_SOURCES:
        if name not in matrix.names:
            raise SchemaError(f"construct_diffs needs column {name!r}")
    temp = matrix.column("MaxTemp") - matrix.column("MinTemp")
    humidity = matrix.column("Humidity9am") - matrix.column("Humidity3pm")
    out = matrix.drop(DIFF_SOURCES)
    return out.with_columns(("MaxDifferenceTemp", "MaxDifferenceHumidity"),
                            np.column_stack([temp, humidity]))


def _standardized_columns(X, names):
    if X.shape[0] < 2:
        raise DomainError("correlation needs at least two rows")
    centered = X - X.mean(axis=0)
    norms = np.sqrt((centered ** 2).sum(axis=0))
    for name, norm, col in zip(names, norms, X.T):
        if norm <= 1e-12 * max(1.0, np.abs(col).max()):
            raise ConstantColumnError(name)
    return centered / norms


def pearson_matrix(matrix):
    Z = _standardized_columns(matrix.X, matrix.names)
    R = Z.T @ Z
    R = np.clip((R + R.T) / 2, -1.0, 1.0)
    np.fill_diagonal(R, 1.0)
    return CorrelationMatrix(matrix.names, R)


def drop_correlated(matrix, corr, threshold=0.95):
    """Greedy left-to-right scan: drop a column whose |r| with an earlier
    retained column exceeds ``threshold``."""
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    retained = []
    for name in matrix.names:
        i = corr.names.index(name)
        if all(abs(corr.values[i, corr.names.index(r)]) <= threshold for r in retained):
            retained.append(name)
    return matrix.select(retained)


def _original(matrix, names):
    cols, out_names = [], []
    for name in names:
        if name in matrix.names:
            cols.append(matrix.column(name))
        elif f"{name}_1" in matrix.names:
            # binary indicator pair collapses back to its label code
            cols.append(matrix.column(f"{name}_1"))
        else:
            raise SchemaError(f"original feature set needs column {name!r}")
        out_names.append(name)
    return FeatureMatrix(tuple(out_names), np.column_stack(cols), matrix.y, matrix.row_ids)


def selected_constructed(matrix, selected=SELECTED_FEATURES, retain=None):
    out = construct_diffs(matrix.select(selected))
    return out if retain is None else out.select(retain)


def assemble(strategy, matrix, pca=None, selected=SELECTED_FEATURES,
             original=ORIGINAL_FEATURES, retain=None):
    """Build the feature set for ``strategy`` from the encoded matrix.

    ``retain`` optionally restricts the selected + constructed columns (the
    survivors of a correlation drop). PC variants append scores of a PCA
    model fitted on exactly those columns.
    """
    strategy = FeatureStrategy.parse(strategy)
    if strategy is FeatureStrategy.ORIGINAL:
        return _original(matrix, original)
    base = selected_constructed(matrix, selected, retain)
    k = strategy.n_components
    if k == 0:
        return base
    if pca is None:
        raise ConfigurationError(f"strategy {strategy.value!r} needs a fitted PCA model")
    from .dimred import pca_transform

    scores = pca_transform(pca, base, k)
    return base.with_columns(tuple(f"PC{i + 1}" for i in range(k)), scores.scores)


def rain_correlation_weights(matrix):
    """|Pearson(feature, label)| normalised to sum to one across features."""
    y = matrix.y.astype(np.float64)
    yc = y - y.mean()
    if not np.any(yc):
        raise DomainError("labels are constant")
    yc /= np.sqrt((yc ** 2).sum())
    Xc = matrix.X - matrix.X.mean(axis=0)
    norms = np.sqrt((Xc ** 2).sum(axis=0))
    r = np.zeros(matrix.n_features)
    nz = norms > 0
    r[nz] = np.abs(Xc[:, nz].T @ yc) / norms[nz]
    total = r.sum()
    if total == 0:
        raise DomainError("no feature correlates with the label")
    return dict(zip(matrix.names, r / total))
