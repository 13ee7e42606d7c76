"""Bernoulli naive Bayes."""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..errors import SpecError


@dataclass(frozen=True)
class NaiveBayesModel:
    priors: np.ndarray  # P(class), shape (2,)
    likelihoods: np.ndarray  # P(feature = 1 | class), shape (2, m)
    binarize: float
    alpha: float

    def log_joint(self, X):
        B = (np.asarray(X, dtype=np.float64) > self.binarize).astype(np.float64)
        logp, log1m = np.log(self.likelihoods), np.log1p(-self.likelihoods)
        return np.log(self.priors) + B @ logp.T + (1.0 - B) @ log1m.T

    def score(self, X):
        """Posterior P(class 1 | x), normalised in log space."""
        joint = self.log_joint(X)
        return np.exp(joint[:, 1] - logsumexp(joint, axis=1))


def fit_bernoulli_nb(X, y, alpha=1.0, binarize=0.0):
    """Features become ``x > binarize``; likelihoods are
    ``(count + alpha) / (n_class + 2 alpha)``."""
    if not alpha > 0:
        raise SpecError("alpha must be positive")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    B = (X > binarize).astype(np.float64)
    n_class = np.array([(y == 0).sum(), (y == 1).sum()], dtype=np.float64)
    if n_class.sum() == 0:
        raise SpecError("cannot fit naive Bayes on zero rows")
    ones = np.vstack([B[y == 0].sum(axis=0), B[y == 1].sum(axis=0)])
    likelihoods = (ones + alpha) / (n_class[:, None] + 2.0 * alpha)
    # a class absent from training gets a vanishing but non-zero prior
    priors = np.maximum(n_class, np.finfo(float).tiny) / n_class.sum()
    return NaiveBayesModel(priors / priors.sum(), likelihoods, float(binarize), float(alpha))
