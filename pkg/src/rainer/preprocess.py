"""Imputation, outlier capping, date features, encoding, balancing, scaling."""

from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .errors import (
    ColumnTypeError,
    ConstantColumnError,
    DateParseError,
    DegenerateLabelError,
    EncodingError,
    PlanMismatchError,
    SchemaError,
    UnimputableColumnError,
)
from .frame import FeatureMatrix
from .ingest import CATEGORICAL, DATE, NUMERIC

MEAN = "mean"
MODE = "mode"

LABEL_ENCODING = "label"
BINARY_INDICATOR = "binary-indicator"

UNDERSAMPLE = "undersample"
UPSAMPLE = "upsample"
_BALANCE_ALIASES = {
    "undersample": UNDERSAMPLE,
    "undersample-negative": UNDERSAMPLE,
    "upsample": UPSAMPLE,
    "upsample-positive": UPSAMPLE,
}


@dataclass(frozen=True)
class ImputePlan:
    strategies: dict
    fills: dict

    def covers(self, name):
        return name in self.fills


@dataclass(frozen=True)
class CapRule:
    column: str
    cap: float

    def __post_init__(self):
        if not np.isfinite(self.cap):
            raise ValueError(f"cap for {self.column!r} must be finite")


DEFAULT_CAP_RULES = (
    CapRule("Rainfall", 3.2),
    CapRule("WindSpeed9am", 55.0),
    CapRule("WindSpeed3pm", 57.0),
)


@dataclass(frozen=True)
class EncodingMap:
    """Per-column ordered categories and encoding kind, plus the label map."""

    categories: dict
    kinds: dict
    label_column: str = None
    label_categories: tuple = ()

    def code(self, column, category):
        try:
            return self.categories[column].index(category)
        except ValueError:
            raise EncodingError(f"column {column!r}: unseen category {category!r}") from None

    def decode(self, column, code):
        return self.categories[column][int(code)]


@dataclass(frozen=True)
class BalancePlan:
    mode: str = UNDERSAMPLE
    seed: int = 0

    def __post_init__(self):
        if self.mode not in _BALANCE_ALIASES:
            raise ValueError(f"unknown balance mode {self.mode!r}")
        object.__setattr__(self, "mode", _BALANCE_ALIASES[self.mode])


def _mode(values):
    uniq, counts = np.unique(np.asarray(values, dtype=str), return_counts=True)
    # np.unique sorts, so argmax picks the lexicographically smallest on ties
    return str(uniq[np.argmax(counts)])


def drop_unlabeled(table, label="RainTomorrow"):
    """Drop rows whose target cell is missing."""
    return table.take(~table.mask(label))


def fit_impute(table, columns=None):
    """Mean fill for numeric columns, mode fill for categorical/date columns.

    Label columns are never imputed; drop unlabeled rows instead.
    """
    if columns is None:
        columns = table.names_of_kind(NUMERIC, CATEGORICAL, DATE)
    strategies, fills = {}, {}
    for name in columns:
        kind = table.kind(name)
        present = ~table.mask(name)
        if not present.any():
            raise UnimputableColumnError(f"column {name!r} has no observed values")
        values = table.column(name)[present]
        if kind == NUMERIC:
            strategies[name] = MEAN
            fills[name] = float(np.mean(values))
        elif kind in (CATEGORICAL, DATE):
            strategies[name] = MODE
            fills[name] = _mode(values)
        else:
            raise ColumnTypeError(f"cannot impute {kind} column {name!r}")
    return ImputePlan(strategies=strategies, fills=fills)


def apply_impute(table, plan):
    out = table
    for name in table.names:
        mask = table.mask(name)
        if not mask.any():
            continue
        if not plan.covers(name):
            raise PlanMismatchError(f"impute plan has no fill for column {name!r}")
        values = table.column(name).copy()
        values[mask] = plan.fills[name]
        out = out.with_column(name, table.kind(name), values)
    return out


def cap_outliers(table, rules=DEFAULT_CAP_RULES):
    """Replace values above each rule's cap with the cap itself."""
    out = table
    for rule in rules:
        if table.kind(rule.column) != NUMERIC:
            raise ColumnTypeError(f"cannot cap non-numeric column {rule.column!r}")
        values = out.column(rule.column)
        capped = np.where(values > rule.cap, rule.cap, values)
        out = out.with_column(rule.column, NUMERIC, capped, out.mask(rule.column))
    return out


def _parse_date(text):
    for fmt in ("%Y-%m-%d", "%d/%m/%Y"):
        try:
            return datetime.strptime(text, fmt)
        except ValueError:
            continue
    raise ValueError(text)


def extract_month(table, date_column="Date"):
    """Replace the date column with a numeric Month column (1..12)."""
    dates = table.column(date_column)
    mask = table.mask(date_column)
    cache = {}
    months = np.empty(table.rows)
    for i, value in enumerate(dates):
        if mask[i] or value is None:
            raise DateParseError(i, value)
        if value not in cache:
            try:
                cache[value] = _parse_date(value).month
            except ValueError:
                raise DateParseError(i, value) from None
        months[i] = cache[value]
    out = table.with_column("Month", NUMERIC, months, after=date_column)
    return out.without([date_column])


def fit_encoding(table, binary_columns=("RainToday",), label_column="RainTomorrow"):
    """Sorted category lists for every categorical column and the label."""
    categories, kinds = {}, {}
    for name in table.names_of_kind(CATEGORICAL):
        observed = table.column(name)[~table.mask(name)]
        categories[name] = tuple(sorted(set(observed)))
        if name in binary_columns:
            if set(categories[name]) <= {"No", "Yes"}:
                categories[name] = ("No", "Yes")
            if len(categories[name]) > 2:
                raise EncodingError(f"binary column {name!r} has {len(categories[name])} categories")
            kinds[name] = BINARY_INDICATOR
        else:
            kinds[name] = LABEL_ENCODING
    label_categories = ()
    if label_column is not None and label_column in table:
        observed = table.column(label_column)[~table.mask(label_column)]
        label_categories = tuple(sorted(set(observed)))
        if len(label_categories) > 2:
            raise EncodingError(f"label {label_column!r} is not binary: {label_categories}")
    return EncodingMap(categories, kinds, label_column, label_categories)


def label_codes(values, label_categories):
    # No/Yes sort to 0/1; any other pair maps in sorted order
    lookup = {c: i for i, c in enumerate(label_categories)}
    if set(label_categories) <= {"No", "Yes"}:
        lookup = {"No": 0, "Yes": 1}
    try:
        return np.array([lookup[v] for v in values], dtype=np.int64)
    except KeyError as exc:
        raise EncodingError(f"unseen label value {exc.args[0]!r}") from None


def encode(table, mapping):
    """Turn an imputed table into a FeatureMatrix.

    Label-encoded columns become one column of codes 0..k-1; binary-indicator
    columns become ``<name>_0`` / ``<name>_1``; the label column becomes ``y``.
    """
    names, columns = [], []
    for name, kind in table.columns:
        if table.mask(name).any():
            raise SchemaError(f"column {name!r} still has missing cells")
        values = table.column(name)
        if kind == NUMERIC:
            names.append(name)
            columns.append(values.astype(np.float64))
        elif kind == CATEGORICAL:
            if name not in mapping.categories:
                raise EncodingError(f"no encoding for column {name!r}")
            lookup = {c: i for i, c in enumerate(mapping.categories[name])}
            try:
                codes = np.array([lookup[v] for v in values], dtype=np.float64)
            except KeyError as exc:
                raise EncodingError(f"column {name!r}: unseen category {exc.args[0]!r}") from None
            if mapping.kinds[name] == BINARY_INDICATOR:
                names += [f"{name}_0", f"{name}_1"]
                columns += [(codes == 0).astype(np.float64), (codes == 1).astype(np.float64)]
            else:
                names.append(name)
                columns.append(codes)
        elif kind == DATE:
            raise SchemaError(f"date column {name!r} must be converted before encoding")
    if mapping.label_column is None or mapping.label_column not in table:
        raise SchemaError("table has no label column")
    y = label_codes(table.column(mapping.label_column), mapping.label_categories)
    X = np.column_stack(columns) if columns else np.empty((table.rows, 0))
    return FeatureMatrix(tuple(names), X, y)


def balance_indices(y, plan):
    """Row indices of a class-balanced resample of labels ``y``."""
    y = np.asarray(y)
    pos = np.flatnonzero(y == 1)
    neg = np.flatnonzero(y == 0)
    if len(pos) == 0 or len(neg) == 0:
        raise DegenerateLabelError("balancing needs both classes present")
    minority, majority = (pos, neg) if len(pos) <= len(neg) else (neg, pos)
    rng = np.random.default_rng(plan.seed)
    if plan.mode == UNDERSAMPLE:
        kept = rng.choice(majority, size=len(minority), replace=False)
        return np.sort(np.concatenate([minority, kept]))
    extra = rng.choice(minority, size=len(majority) - len(minority), replace=True)
    return np.concatenate([np.arange(len(y)), np.sort(extra)])


def balance(matrix, plan):
    return matrix.take(balance_indices(matrix.y, plan))


def zscore(matrix):
    """Standardize every column with its mean and population std."""
    means = matrix.X.mean(axis=0)
    stds = matrix.X.std(axis=0)
    for name, m, s in zip(matrix.names, means, stds):
        if s <= 1e-12 * max(1.0, abs(m)):
            raise ConstantColumnError(name)
    return apply_zscore(matrix, means, stds), means, stds


def apply_zscore(matrix, means, stds):
    X = (matrix.X - means) / stds
    return FeatureMatrix(matrix.names, X, matrix.y, matrix.row_ids)
