"""Seeded train/validation/test splits, k-fold CV and exhaustive grid search."""

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, GridSearchError, SplitError
from .metrics import evaluate
from .models import ModelSpec, fit, predict_scores

METRICS = ("accuracy", "precision", "recall", "f1", "auc")


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple = (0.8, 0.1, 0.1)
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        r = tuple(float(v) for v in self.ratios)
        if len(r) != 3 or any(not v > 0 for v in r) or abs(sum(r) - 1.0) > 1e-12:
            raise SplitError(f"split ratios must be three positive fractions summing to 1, got {r}")
        object.__setattr__(self, "ratios", r)


def _sizes(n, ratios):
    val, test = round(ratios[1] * n), round(ratios[2] * n)
    return n - val - test, val, test


def largest_remainder(total, weights):
    """Integer allocation of ``total`` proportional to ``weights``; leftover
    units go to the largest fractional parts, earlier entries first on ties."""
    weights = np.asarray(weights, dtype=np.float64)
    exact = total * weights / weights.sum()
    base = np.floor(exact).astype(np.int64)
    order = np.argsort(-(exact - base), kind="stable")
    base[order[: total - base.sum()]] += 1
    return base


def split(y, spec=SplitSpec()):
    """Disjoint, exhaustive ``(train, val, test)`` sorted index arrays.

    Validation and test get ``round(ratio * n)`` rows, train the rest. In
    stratified mode each part's quota is shared among the classes in
    proportion to class size.
    """
    y = np.asarray(getattr(y, "y", y))
    n = len(y)
    if spec.stratified and n < 10:
        raise SplitError(f"stratified splitting needs at least 10 rows, got {n}")
    sizes = _sizes(n, spec.ratios)
    if min(sizes) < 1:
        raise SplitError(f"split sizes {sizes} leave a part empty (n={n})")
    rng = np.random.default_rng(spec.seed)
    if not spec.stratified:
        perm = rng.permutation(n)
        bounds = np.cumsum(sizes)[:-1]
        return tuple(np.sort(part) for part in np.split(perm, bounds))
    classes = np.unique(y)
    counts = np.array([(y == c).sum() for c in classes])
    val_q = largest_remainder(sizes[1], counts)
    test_q = largest_remainder(sizes[2], counts)
    parts = ([], [], [])
    for c, nv, nt in zip(classes, val_q, test_q):
        members = rng.permutation(np.flatnonzero(y == c))
        parts[1].append(members[:nv])
        parts[2].append(members[nv:nv + nt])
        parts[0].append(members[nv + nt:])
    return tuple(np.sort(np.concatenate(p)) for p in parts)


def kfold(indices, k=5, seed=0):
    """``k`` (train, validate) pairs; validate folds partition ``indices``
    and differ in size by at most one."""
    indices = np.asarray(indices)
    if k < 2:
        raise SplitError("k must be at least 2")
    if k > len(indices):
        raise SplitError(f"k={k} exceeds the {len(indices)} available rows")
    perm = np.random.default_rng(seed).permutation(indices)
    folds = np.array_split(perm, k)
    return [(np.sort(np.concatenate(folds[:i] + folds[i + 1:])), np.sort(folds[i]))
            for i in range(k)]


@dataclass(frozen=True)
class ParamGrid:
    values: dict  # name -> list of candidate values, iterated in insertion order
    budget: int = 10_000

    def __post_init__(self):
        if not self.values:
            raise ConfigurationError("parameter grid is empty")
        for name, vals in self.values.items():
            if not isinstance(vals, (list, tuple)) or len(vals) == 0:
                raise ConfigurationError(f"grid entry {name!r} needs a non-empty list of values")
        if self.size > self.budget:
            raise ConfigurationError(f"grid has {self.size} combinations, budget is {self.budget}")

    @property
    def size(self):
        return int(np.prod([len(v) for v in self.values.values()]))

    def combinations(self):
        names = list(self.values)
        return [dict(zip(names, combo)) for combo in itertools.product(*self.values.values())]


@dataclass(frozen=True)
class CvResult:
    table: list  # one dict per combination, grid order
    best_index: int
    winner: ModelSpec

    @property
    def best(self):
        return self.table[self.best_index]


def _metric(name, labels, scores):
    value = evaluate(labels, scores)[name]
    return np.nan if value is None else value


def grid_search(algorithm, grid, matrix, train_indices, k=5, metric="accuracy", seed=0,
                threads=1, fit_threads=1):
    """Score every grid combination by k-fold CV on ``train_indices``.

    The winner has the highest mean metric; ties and all-undefined rows
    resolve to the earliest combination. Thread count never changes the
    result: each (combination, fold) task is deterministic and results are
    assembled by index.
    """
    if metric not in METRICS:
        raise ConfigurationError(f"unknown selection metric {metric!r}; expected one of {METRICS}")
    combos = grid.combinations()
    specs = []
    for params in combos:
        try:
            specs.append(ModelSpec(algorithm, params, seed))
        except Exception as exc:
            raise GridSearchError(params, exc) from exc
    folds = kfold(train_indices, k, seed)
    tasks = [(c, f) for c in range(len(combos)) for f in range(len(folds))]

    def run(task):
        c, f = task
        tr, va = folds[f]
        try:
            model = fit(specs[c], matrix.take(tr), fit_threads)
            va_matrix = matrix.take(va)
            return _metric(metric, va_matrix.y, predict_scores(model, va_matrix))
        except Exception as exc:
            raise GridSearchError(combos[c], exc) from exc

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            values = list(pool.map(run, tasks))
    else:
        values = [run(t) for t in tasks]
    scores = np.array(values, dtype=np.float64).reshape(len(combos), len(folds))
    table = []
    for params, row in zip(combos, scores):
        defined = row[~np.isnan(row)]
        table.append({"params": params, "fold_scores": [float(v) for v in row],
                      "mean": float(defined.mean()) if len(defined) else None,
                      "std": float(defined.std()) if len(defined) else None})
    means = np.array([-np.inf if t["mean"] is None else t["mean"] for t in table])
    best = int(np.argmax(means))
    return CvResult(table, best, specs[best])
