"""Loading the weather CSV into a typed table with a missingness mask."""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyInputError, EmptySchemaError, SchemaError

NUMERIC = "numeric"
CATEGORICAL = "categorical"
DATE = "date"
LABEL = "label"
KINDS = (NUMERIC, CATEGORICAL, DATE, LABEL)

MISSING_MARKERS = frozenset({"", "NA"})

# Column kinds of the BoM weatherAUS export, in file order.
BOM_SCHEMA = {
    "Date": DATE,
    "Location": CATEGORICAL,
    "MinTemp": NUMERIC,
    "MaxTemp": NUMERIC,
    "Rainfall": NUMERIC,
    "Evaporation": NUMERIC,
    "Sunshine": NUMERIC,
    "WindGustDir": CATEGORICAL,
    "WindGustSpeed": NUMERIC,
    "WindDir9am": CATEGORICAL,
    "WindDir3pm": CATEGORICAL,
    "WindSpeed9am": NUMERIC,
    "WindSpeed3pm": NUMERIC,
    "Humidity9am": NUMERIC,
    "Humidity3pm": NUMERIC,
    "Pressure9am": NUMERIC,
    "Pressure3pm": NUMERIC,
    "Cloud9am": NUMERIC,
    "Cloud3pm": NUMERIC,
    "Temp9am": NUMERIC,
    "Temp3pm": NUMERIC,
    "RainToday": CATEGORICAL,
    "RainTomorrow": LABEL,
}


@dataclass(frozen=True)
class RawTable:
    """Column-oriented table of raw cells.

    Numeric columns are float64 arrays with NaN in missing cells; every other
    kind is an object array holding strings, with None in missing cells.
    ``missing_mask`` is the authoritative record of missingness.
    """

    columns: tuple  # of (name, kind)
    cells: dict
    missing_mask: dict
    rows: int

    def __post_init__(self):
        names = [name for name, _ in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate column names in {names}")
        for name, kind in self.columns:
            if kind not in KINDS:
                raise SchemaError(f"column {name!r}: unknown kind {kind!r}")
            if len(self.cells[name]) != self.rows or len(self.missing_mask[name]) != self.rows:
                raise SchemaError(f"column {name!r} does not have {self.rows} cells")

    @property
    def names(self):
        return [name for name, _ in self.columns]

    def kind(self, name):
        for col, kind in self.columns:
            if col == name:
                return kind
        raise SchemaError(f"no column named {name!r}")

    def __contains__(self, name):
        return name in self.cells

    def column(self, name):
        if name not in self.cells:
            raise SchemaError(f"no column named {name!r}")
        return self.cells[name]

    def mask(self, name):
        if name not in self.missing_mask:
            raise SchemaError(f"no column named {name!r}")
        return self.missing_mask[name]

    def names_of_kind(self, *kinds):
        return [name for name, kind in self.columns if kind in kinds]

    def n_missing(self):
        return int(sum(m.sum() for m in self.missing_mask.values()))

    def select(self, names):
        names = list(names)
        for name in names:
            self.column(name)
        return RawTable(
            columns=tuple((n, self.kind(n)) for n in names),
            cells={n: self.cells[n] for n in names},
            missing_mask={n: self.missing_mask[n] for n in names},
            rows=self.rows,
        )

    def take(self, rows):
        """Row subset (or reordering) by integer indices or boolean mask."""
        rows = np.asarray(rows)
        if rows.dtype == bool:
            rows = np.flatnonzero(rows)
        return RawTable(
            columns=self.columns,
            cells={n: v[rows] for n, v in self.cells.items()},
            missing_mask={n: m[rows] for n, m in self.missing_mask.items()},
            rows=len(rows),
        )

    def with_column(self, name, kind, values, mask=None, after=None):
        """Return a copy with ``name`` replaced or appended."""
        values = np.asarray(values)
        if mask is None:
            mask = np.zeros(self.rows, dtype=bool)
        columns = [c for c in self.columns if c[0] != name]
        if name in self.cells:
            position = self.names.index(name)
        elif after is not None:
            position = [c[0] for c in columns].index(after) + 1
        else:
            position = len(columns)
        columns.insert(position, (name, kind))
        cells = dict(self.cells)
        cells[name] = values
        masks = dict(self.missing_mask)
        masks[name] = np.asarray(mask, dtype=bool)
        return RawTable(columns=tuple(columns), cells=cells, missing_mask=masks, rows=self.rows)

    def without(self, names):
        drop = set(names)
        return self.select([n for n in self.names if n not in drop])


@dataclass(frozen=True)
class MissingnessProfile:
    fractions: dict = field(default_factory=dict)
    rows: int = 0

    def __getitem__(self, name):
        return self.fractions[name]

    def items(self):
        return self.fractions.items()


def _parse_numeric(raw):
    values = np.full(len(raw), np.nan)
    mask = np.zeros(len(raw), dtype=bool)
    for i, cell in enumerate(raw):
        if cell in MISSING_MARKERS:
            mask[i] = True
            continue
        try:
            values[i] = float(cell)
        except ValueError:
            mask[i] = True
            continue
        if not np.isfinite(values[i]):
            values[i] = np.nan
            mask[i] = True
    return values, mask


def _parse_text(raw):
    values = np.empty(len(raw), dtype=object)
    mask = np.zeros(len(raw), dtype=bool)
    for i, cell in enumerate(raw):
        if cell in MISSING_MARKERS:
            mask[i] = True
            values[i] = None
        else:
            values[i] = cell
    return values, mask


def table_from_columns(raw_columns, schema):
    """Build a RawTable from per-column lists of cell strings."""
    names = list(raw_columns)
    rows = len(raw_columns[names[0]]) if names else 0
    cells, masks = {}, {}
    for name in names:
        if schema[name] == NUMERIC:
            cells[name], masks[name] = _parse_numeric(raw_columns[name])
        else:
            cells[name], masks[name] = _parse_text(raw_columns[name])
    return RawTable(
        columns=tuple((n, schema[n]) for n in names),
        cells=cells,
        missing_mask=masks,
        rows=rows,
    )


def load_csv(path, schema=None):
    """Read a comma-separated file whose header matches ``schema``.

    ``schema`` maps column name to kind; it defaults to the 23-column BoM
    layout. The header must contain exactly the declared columns (any order).
    Empty cells and the literal ``NA`` are missing; so is any numeric cell
    that does not parse as a decimal.
    """
    schema = dict(BOM_SCHEMA if schema is None else schema)
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        missing = [c for c in schema if c not in header]
        extra = [c for c in header if c not in schema]
        if missing or extra or len(set(header)) != len(header):
            raise SchemaError(
                f"{path}: header does not match schema "
                f"(missing={missing}, unexpected={extra})"
            )
        raw = {name: [] for name in header}
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise SchemaError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(record)}"
                )
            for name, cell in zip(header, record):
                raw[name].append(cell.strip())
    if not raw[header[0]]:
        raise EmptyInputError(f"{path}: no data rows")
    return table_from_columns(raw, schema)


def missingness_profile(table):
    if table.rows == 0:
        raise EmptyInputError("table has no rows")
    return MissingnessProfile(
        fractions={n: int(table.missing_mask[n].sum()) / table.rows for n in table.names},
        rows=table.rows,
    )


def drop_high_missingness(table, threshold=0.30):
    """Remove columns whose missing fraction strictly exceeds ``threshold``.

    A threshold of 0 drops every column with at least one gap; 1.0 is a no-op.
    """
    if not 0 <= threshold <= 1:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    profile = missingness_profile(table)
    keep = [n for n in table.names if not profile[n] > threshold]
    if not keep:
        raise EmptySchemaError(f"every column exceeds missingness threshold {threshold}")
    return table.select(keep)
