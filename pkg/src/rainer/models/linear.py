"""Linear classifiers: least squares, Fisher LDA and penalised logistic regression."""

from dataclasses import dataclass

import numpy as np

from ..errors import NumericError, SpecError


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_loss(y, z):
    """Mean binary cross-entropy for logits ``z``."""
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


@dataclass(frozen=True)
class LinearModel:
    """``intercept + X @ coef`` followed by a link: ``clamp`` maps the linear
    value into [0, 1], ``logistic`` applies the sigmoid."""

    intercept: float
    coef: np.ndarray
    link: str = "logistic"
    n_iter: int = 0
    converged: bool = True

    def decision(self, X):
        return self.intercept + np.asarray(X, dtype=np.float64) @ self.coef

    def score(self, X):
        z = self.decision(X)
        if self.link == "clamp":
            return np.clip(z, 0.0, 1.0)
        return sigmoid(z)


def fit_ols(X, y, fit_intercept=True):
    """Ordinary least squares on 0/1 targets; scores are clamped to [0, 1]."""
    X = np.asarray(X, dtype=np.float64)
    A = np.hstack([np.ones((len(X), 1)), X]) if fit_intercept else X
    beta, *_ = np.linalg.lstsq(A, np.asarray(y, dtype=np.float64), rcond=None)
    if fit_intercept:
        return LinearModel(float(beta[0]), beta[1:], link="clamp")
    return LinearModel(0.0, beta, link="clamp")


def fit_lda(X, y, ridge=1e-8):
    """Two-class LDA with a pooled within-class covariance.

    The score is the Gaussian shared-covariance posterior
    ``sigmoid(w.x + b)`` with ``w = S^-1 (mu1 - mu0)``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    X0, X1 = X[y == 0], X[y == 1]
    if len(X0) == 0 or len(X1) == 0:
        raise SpecError("LDA needs both classes")
    mu0, mu1 = X0.mean(axis=0), X1.mean(axis=0)
    centered = np.vstack([X0 - mu0, X1 - mu1])
    S = centered.T @ centered / max(len(X) - 2, 1)
    m = S.shape[0]
    if np.linalg.cond(S) > 1e12:
        S = S + ridge * np.eye(m)
    try:
        w = np.linalg.solve(S, mu1 - mu0)
    except np.linalg.LinAlgError:
        raise NumericError("within-class covariance is singular") from None
    if not np.all(np.isfinite(w)):
        raise NumericError("within-class covariance is singular")
    prior = np.log(len(X1) / len(X0))
    b = -0.5 * (mu0 + mu1) @ w + prior
    return LinearModel(float(b), w, link="logistic")


def _soft_threshold(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def fit_logistic(X, y, penalty="l2", C=1.0, l1_ratio=0.5, max_iter=1000, tol=1e-6):
    """Minimise mean log-loss + (1/C) * penalty by accelerated proximal gradient.

    ``penalty`` is one of none, l1, l2, elastic; the elastic penalty is
    ``l1_ratio * |w|_1 + (1 - l1_ratio) * |w|^2 / 2``. The intercept is never
    penalised. Iteration stops once the largest parameter change falls below
    ``tol`` or after ``max_iter`` steps.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, m = X.shape
    if penalty in (None, "none"):
        l1, l2 = 0.0, 0.0
    elif penalty in ("l1", "l_1"):
        l1, l2 = 1.0 / C, 0.0
    elif penalty in ("l2", "l_2"):
        l1, l2 = 0.0, 1.0 / C
    elif penalty in ("elastic", "elasticnet"):
        l1, l2 = l1_ratio / C, (1.0 - l1_ratio) / C
    else:
        raise SpecError(f"unknown penalty {penalty!r}")

    A = np.hstack([np.ones((n, 1)), X])
    lipschitz = 0.25 * np.linalg.eigvalsh(A.T @ A / n)[-1] + l2
    step = 1.0 / lipschitz

    def grad(theta):
        p = sigmoid(A @ theta)
        g = A.T @ (p - y) / n
        g[1:] += l2 * theta[1:]
        return g

    theta = np.zeros(m + 1)
    momentum_point = theta.copy()
    t = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        proposal = momentum_point - step * grad(momentum_point)
        proposal[1:] = _soft_threshold(proposal[1:], step * l1)
        if not np.all(np.isfinite(proposal)):
            raise NumericError(f"logistic regression diverged at iteration {it}")
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        change = np.max(np.abs(proposal - theta))
        momentum_point = proposal + ((t - 1.0) / t_next) * (proposal - theta)
        theta, t = proposal, t_next
        if change < tol:
            converged = True
            break
    if not np.isfinite(log_loss(y, A @ theta)):
        raise NumericError("logistic regression loss is not finite")
    return LinearModel(float(theta[0]), theta[1:], "logistic", n_iter=it, converged=converged)
