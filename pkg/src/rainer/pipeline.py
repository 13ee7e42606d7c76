"""End-to-end stages behind the command line: inspect, reduce, train,
gridsearch and evaluate.

Balancing and splitting depend only on the labels, so both are fixed before
any statistic is fitted. Imputation fills come from every labeled row
(``impute: full``) or from the training rows only (``impute: train``);
standardisation and PCA are always fitted on the training rows.
"""

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .dimred import (TsneConfig, pca_fit, pca_loadings_report, pca_transform, scree_table,
                     tsne_affinities, tsne_embed)
from .ensemble import VotingSpec, fit_voting
from .errors import RainerError
from .features import (FeatureStrategy, assemble, drop_correlated, pearson_matrix,
                       rain_correlation_weights, selected_constructed)
from .ingest import DATE, drop_high_missingness, load_csv, missingness_profile
from .metrics import evaluate as evaluate_scores
from .metrics import roc_points
from .models import ModelSpec, fit, predict_scores
from .preprocess import (BalancePlan, CapRule, apply_impute, apply_zscore, balance_indices,
                         cap_outliers, drop_unlabeled, encode, extract_month, fit_encoding,
                         fit_impute, label_codes, zscore)
from .tuning import ParamGrid, grid_search, largest_remainder, split

TIMING_KEYS = ("generated_at", "wall_clock_seconds")
# headline metrics always come from the held-out test split
EVALUATED_ON = "test"


@dataclass(frozen=True)
class Prepared:
    profile: object  # MissingnessProfile of the raw file
    dropped: tuple  # columns removed for missingness
    full: object  # FeatureMatrix over every labeled row, unbalanced
    matrix: object  # balanced rows; row_ids index into ``full``
    train: np.ndarray  # positions in ``matrix``
    val: np.ndarray
    test: np.ndarray


def prepare(config):
    raw = load_csv(config.input, config.schema)
    profile = missingness_profile(raw)
    kept = drop_high_missingness(raw, config.missing_threshold)
    dropped = tuple(n for n in raw.names if n not in kept)
    table = drop_unlabeled(kept, config.label)
    for name in table.names_of_kind(DATE):
        table = extract_month(table, name)
    labels = table.column(config.label)
    categories = tuple(sorted(set(labels)))
    y = label_codes(labels, categories)
    if config.balance == "none":
        rows = np.arange(len(y))
    else:
        rows = balance_indices(y, BalancePlan(config.balance, config.seed))
    train, val, test = split(y[rows], config.split_spec())
    fit_rows = np.unique(rows[train]) if config.impute == "train" else np.arange(len(y))
    plan = fit_impute(table.take(fit_rows))
    table = apply_impute(table, plan)
    rules = [CapRule(c, v) for c, v in config.caps.items() if c in table]
    table = cap_outliers(table, rules)
    mapping = fit_encoding(table, config.binary_columns, config.label)
    full = encode(table, mapping)
    return Prepared(profile, dropped, full, full.take(rows), train, val, test)


@dataclass(frozen=True)
class FeatureSet:
    strategy: str
    train: object
    val: object
    test: object


def build_features(prepared, strategy, config):
    """Scaled train/val/test matrices for one strategy."""
    strategy = FeatureStrategy.parse(strategy)
    m = prepared.matrix
    retain = None
    if config.drop_correlated and strategy is not FeatureStrategy.ORIGINAL:
        base = selected_constructed(m.take(prepared.train))
        retain = drop_correlated(base, pearson_matrix(base), config.correlation_threshold).names
    pca = None
    if strategy.n_components:
        base = selected_constructed(m.take(prepared.train), retain=retain)
        pca = pca_fit(base)
    features = assemble(strategy, m, pca=pca, retain=retain)
    train, means, stds = zscore(features.take(prepared.train))
    return FeatureSet(strategy.value, train, apply_zscore(features.take(prepared.val), means, stds),
                      apply_zscore(features.take(prepared.test), means, stds))


def _fit_entry(entry, params, train, seed):
    if entry.composite:
        spec = VotingSpec.parse(entry.name, entry.voting, entry.weights)
        model = fit_voting(spec, train, entry.members, seed)
        return model, model.scores
    model = fit(ModelSpec(entry.name, params, seed), train)
    return model, lambda matrix: predict_scores(model, matrix)


def run_cell(entry, features, config, command):
    """Fit one model on one feature set; score the test split (``metrics``)
    and the validation split (``validation_metrics``).

    ``train`` uses the configured parameters as given; ``gridsearch`` and
    ``evaluate`` first pick grid values by cross-validation on the training
    split. Failures are recorded in the row rather than raised.
    """
    start = time.perf_counter()
    row = {
        "model": entry.name, "strategy": features.strategy, "seed": config.seed,
        "evaluated_on": EVALUATED_ON,
        "config_delta": {"balance_mode": config.balance, "impute_mode": config.impute},
        "status": "ok", "error": None, "metrics": None, "validation_metrics": None,
        "cv": None, "roc": None,
        "features": list(features.train.names),
    }
    try:
        params = dict(entry.params)
        if entry.grid and command in ("gridsearch", "evaluate"):
            train = features.train
            result = grid_search(entry.name, ParamGrid(entry.grid, config.budget), train,
                                 np.arange(train.n_rows), config.k, config.metric, config.seed)
            params = {**params, **result.best["params"]}
            row["cv"] = {"metric": config.metric, "k": config.k, "best_index": result.best_index,
                         "table": result.table}
        if entry.composite:
            row["hyperparameters"] = {m: ModelSpec(m, p, config.seed).params
                                      for m, p in entry.members.items()}
            row["voting"] = entry.voting
        else:
            row["hyperparameters"] = ModelSpec(entry.name, params, config.seed).params
        model, score = _fit_entry(entry, params, features.train, config.seed)
        row["fit"] = ({m.algorithm: m.metadata for m in model.members} if entry.composite
                      else model.metadata)
        row["validation_metrics"] = evaluate_scores(features.val.y, score(features.val))
        target = features.test
        scores = score(target)
        row["metrics"] = evaluate_scores(target.y, scores)
        try:
            curve = roc_points(target.y, scores)
            row["roc"] = [[float(t), float(f), float(p)]
                          for t, f, p in zip(curve.thresholds, curve.fpr, curve.tpr)]
        except RainerError:
            row["roc"] = None
    except (RainerError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
        row["metrics"] = row["validation_metrics"] = None
    row["wall_clock_seconds"] = time.perf_counter() - start
    return row


def _write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def run_models(config, command, prepared=None, log=print):
    """Fit every (model, strategy) cell and write report.json and roc/*.csv.

    Returns the report dict; ``report["failed_cells"]`` counts error rows.
    """
    prepared = prepare(config) if prepared is None else prepared
    feature_sets, feature_errors = {}, {}
    for strategy in config.strategies:
        try:
            feature_sets[strategy] = build_features(prepared, strategy, config)
        except (RainerError, ValueError, ArithmeticError) as exc:
            feature_errors[strategy] = f"{type(exc).__name__}: {exc}"

    cells = [(entry, s) for entry in config.models for s in config.strategies]

    def run(cell):
        entry, strategy = cell
        if strategy in feature_errors:
            return {"model": entry.name, "strategy": strategy, "seed": config.seed,
                    "evaluated_on": EVALUATED_ON, "status": "error",
                    "error": feature_errors[strategy], "metrics": None,
                    "validation_metrics": None,
                    "config_delta": {"balance_mode": config.balance,
                                     "impute_mode": config.impute},
                    "wall_clock_seconds": 0.0}
        return run_cell(entry, feature_sets[strategy], config, command)

    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(c) for c in cells]

    out = Path(config.output)
    for row in rows:
        roc = row.pop("roc", None)
        if roc is not None:
            _write_csv(out / "roc" / f"{row['model']}__{row['strategy']}.csv",
                       ["threshold", "fpr", "tpr"], [[_fmt(v) for v in r] for r in roc])
    report = {
        "command": command,
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "seed": config.seed,
        "evaluated_on": EVALUATED_ON,
        "config": config.summary(),
        "data": {
            "dropped_columns": list(prepared.dropped),
            "labeled_rows": int(prepared.full.n_rows),
            "balanced_rows": int(prepared.matrix.n_rows),
            "class_counts": list(prepared.matrix.class_counts()),
            "split_sizes": {"train": int(len(prepared.train)), "validation": int(len(prepared.val)),
                            "test": int(len(prepared.test))},
        },
        "rows": rows,
        "failed_cells": sum(r["status"] != "ok" for r in rows),
    }
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
    for row in rows:
        m = row["metrics"] or {}
        shown = " ".join(f"{k}={m[k]:.4f}" if m.get(k) is not None else f"{k}=n/a"
                         for k in ("accuracy", "precision", "recall", "f1", "auc"))
        log(f"{row['model']:>18} {row['strategy']:<26} {row['status']:<5} "
            f"{shown if row['status'] == 'ok' else row['error']}")
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def strip_timing(report):
    """Copy of a report without wall-clock fields, for determinism checks."""
    if isinstance(report, dict):
        return {k: strip_timing(v) for k, v in report.items() if k not in TIMING_KEYS}
    if isinstance(report, list):
        return [strip_timing(v) for v in report]
    return report


def _safe_correlation(matrix):
    keep = [n for n in matrix.names if np.ptp(matrix.column(n)) > 0]
    return pearson_matrix(matrix.select(keep))


def run_inspect(config, prepared=None, log=print):
    """missingness.csv, correlation.csv and weights.csv."""
    prepared = prepare(config) if prepared is None else prepared
    out = Path(config.output)
    profile = prepared.profile
    _write_csv(out / "missingness.csv", ["column", "kind", "missing_fraction", "dropped"],
               [[name, config.schema[name], _fmt(frac), name in prepared.dropped]
                for name, frac in profile.items()])
    base = selected_constructed(prepared.full)
    corr = _safe_correlation(base)
    _write_csv(out / "correlation.csv", ["feature", *corr.names],
               [[a, *(_fmt(v) for v in row)] for a, row in zip(corr.names, corr.values)])
    weights = rain_correlation_weights(base)
    ranked = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))
    _write_csv(out / "weights.csv", ["feature", "weight"], [[k, _fmt(v)] for k, v in ranked])

    log(f"rows: {profile.rows}; dropped for missingness > {config.missing_threshold}: "
        f"{', '.join(prepared.dropped) or 'none'}")
    for name, frac in profile.items():
        log(f"  {name:<16} {frac:7.2%}")
    iu = np.triu_indices(len(corr.names), 1)
    order = np.argsort(-np.abs(corr.values[iu]), kind="stable")[:5]
    log("strongest feature correlations:")
    for i in order:
        a, b = corr.names[iu[0][i]], corr.names[iu[1][i]]
        log(f"  {a} ~ {b}: {corr.values[iu][i]:+.4f}")
    log("top rain correlation weights: "
        + ", ".join(f"{k} {v:.4f}" for k, v in ranked[:3]))
    return {"profile": profile, "correlation": corr, "weights": weights}


def stratified_sample(matrix, size, seed):
    """Seeded sample of distinct source rows with class shares preserved.

    Upsampled duplicates are skipped: repeated points would sit at zero
    distance and distort the t-SNE affinities.
    """
    _, first = np.unique(matrix.row_ids, return_index=True)
    pool = np.sort(first)
    size = min(size, len(pool))
    labels = matrix.y[pool]
    classes = np.unique(labels)
    counts = np.array([(labels == c).sum() for c in classes])
    quotas = largest_remainder(size, counts)
    rng = np.random.default_rng(seed)
    picked = [rng.choice(pool[labels == c], size=q, replace=False)
              for c, q in zip(classes, quotas)]
    return matrix.take(np.sort(np.concatenate(picked)))


def run_reduce(config, prepared=None, log=print):
    """PCA on the original feature set for the unbalanced and balanced data,
    plus a t-SNE embedding of a seeded sample of the balanced data."""
    prepared = prepare(config) if prepared is None else prepared
    out = Path(config.output)
    datasets = {"original": prepared.full, "balanced": prepared.matrix}
    scree, loadings, scores, models = [], [], [], {}
    k = config.loadings_components
    for label, matrix in datasets.items():
        feats = assemble(FeatureStrategy.ORIGINAL, matrix)
        model = pca_fit(feats)
        models[label] = model
        for r in scree_table(model):
            scree.append([label, r["component"], _fmt(r["eigenvalue"]), _fmt(r["ratio"]),
                          _fmt(r["cumulative"])])
        for r in pca_loadings_report(model, k):
            loadings.append([label, r["feature"], *(_fmt(r[f"PC{j + 1}"]) for j in range(k))])
        proj = pca_transform(model, feats, min(2, model.m))
        for rid, s, c, y in zip(matrix.row_ids, proj.scores, proj.cos2, matrix.y):
            scores.append([label, int(rid), *(_fmt(v) for v in s), _fmt(c), int(y)])
        log(f"PCA {label}: cumulative variance at 13 components "
            f"{model.cumulative_ratio(min(13, model.m)):.4f}")
    _write_csv(out / "scree.csv", ["dataset", "component", "eigenvalue", "ratio", "cumulative"],
               scree)
    _write_csv(out / "loadings.csv", ["dataset", "feature", *(f"PC{j + 1}" for j in range(k))],
               loadings)
    _write_csv(out / "scores.csv", ["dataset", "row", "PC1", "PC2", "cos2", "label"], scores)

    balanced = selected_constructed(prepared.matrix)
    sample = stratified_sample(balanced, config.tsne.sample, config.seed)
    scaled, _, _ = zscore(sample)
    tcfg = TsneConfig(perplexity=config.tsne.perplexity, n_iter=config.tsne.n_iter,
                      learning_rate=config.tsne.learning_rate,
                      early_exaggeration=config.tsne.early_exaggeration, seed=config.seed)
    emb = tsne_embed(tsne_affinities(scaled.X, tcfg), tcfg)
    _write_csv(out / "tsne.csv", ["row", "x", "y", "label"],
               [[int(r), _fmt(a), _fmt(b), int(lab)]
                for r, (a, b), lab in zip(scaled.row_ids, emb.Y, scaled.y)])
    log(f"t-SNE on {sample.n_rows} rows: final KL {emb.kl:.4f}")
    return {"pca": models, "tsne": emb}
