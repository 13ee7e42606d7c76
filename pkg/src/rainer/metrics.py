"""Confusion-matrix statistics, ROC curves and AUC.

Undefined ratios (zero denominators) come back as ``None``, never 0.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import DomainError, UndefinedMetricError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def n(self):
        return self.tp + self.tn + self.fp + self.fn


def _binary(values, what):
    a = np.asarray(values)
    if a.ndim != 1:
        raise DomainError(f"{what} must be one-dimensional")
    if not np.all((a == 0) | (a == 1)):
        raise DomainError(f"{what} must be 0/1")
    return a.astype(bool)


def confusion(labels, predictions):
    if len(labels) != len(predictions):
        raise DomainError(f"{len(labels)} labels but {len(predictions)} predictions")
    y, p = _binary(labels, "labels"), _binary(predictions, "predictions")
    return ConfusionMatrix(tp=int((y & p).sum()), tn=int((~y & ~p).sum()),
                           fp=int((~y & p).sum()), fn=int((y & ~p).sum()))


def _ratio(num, den):
    return None if den == 0 else num / den


def accuracy(cm):
    return _ratio(cm.tp + cm.tn, cm.n)


def precision(cm):
    return _ratio(cm.tp, cm.tp + cm.fp)


def recall(cm):
    return _ratio(cm.tp, cm.tp + cm.fn)


def f_beta(p, r, beta=1.0):
    if p is None or r is None:
        return None
    b2 = beta * beta
    den = b2 * p + r
    return None if den == 0 else (1.0 + b2) * p * r / den


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # first entry is +inf for the (0, 0) point


def _both_classes(labels, scores):
    y = _binary(labels, "labels")
    s = np.asarray(scores, dtype=np.float64)
    if len(y) != len(s):
        raise DomainError(f"{len(y)} labels but {len(s)} scores")
    if y.all() or not y.any():
        raise UndefinedMetricError("ROC/AUC need both classes present")
    return y, s


def roc_points(labels, scores):
    """One point per distinct score, descending, predicting ``score >= t``.

    Tied scores move FPR and TPR together in a single diagonal step.
    """
    y, s = _both_classes(labels, scores)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last_of_run = np.r_[s[1:] != s[:-1], True]
    tp = np.cumsum(y)[last_of_run]
    fp = np.cumsum(~y)[last_of_run]
    return RocCurve(fpr=np.r_[0.0, fp / fp[-1]], tpr=np.r_[0.0, tp / tp[-1]],
                    thresholds=np.r_[np.inf, s[last_of_run]])


def auc_trapezoid(curve):
    x, y = curve.fpr, curve.tpr
    return float(((x[1:] - x[:-1]) * (y[1:] + y[:-1])).sum() / 2.0)


def auc_pairwise(labels, scores):
    """P(score of a random positive > score of a random negative), ties 0.5,
    counted through mid-ranks."""
    y, s = _both_classes(labels, scores)
    ranks = rankdata(s)
    n1, n0 = int(y.sum()), int((~y).sum())
    return float((ranks[y].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def evaluate(labels, scores, threshold=0.5):
    """Accuracy, precision, recall, F1 and AUC; undefined entries are None."""
    scores = np.asarray(scores, dtype=np.float64)
    cm = confusion(labels, (scores >= threshold).astype(np.int64))
    p, r = precision(cm), recall(cm)
    try:
        auc = auc_trapezoid(roc_points(labels, scores))
    except UndefinedMetricError:
        auc = None
    return {"accuracy": accuracy(cm), "precision": p, "recall": r, "f1": f_beta(p, r, 1.0),
            "auc": auc, "tp": cm.tp, "tn": cm.tn, "fp": cm.fp, "fn": cm.fn}
