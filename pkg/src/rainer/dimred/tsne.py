"""Exact t-SNE: perplexity-calibrated Gaussian affinities in the input space,
Student-t affinities in the embedding, KL divergence minimised by momentum
gradient descent.

Naming: the per-point Gaussian distribution is the *conditional* affinity,
its symmetrised version the *joint* affinity ``P``; ``Q`` is the embedding's
Student-t distribution.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import CalibrationError, DomainError, NumericError


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 30.0
    n_components: int = 2
    learning_rate: object = "auto"
    n_iter: int = 1000
    momentum: float = 0.5
    final_momentum: float = 0.8
    momentum_switch: float = 0.25  # fraction of iterations run at ``momentum``
    early_exaggeration: float = 12.0
    exaggeration_fraction: float = 0.15
    exaggerate: bool = True
    perplexity_tol: float = 1e-4
    max_bisection: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.perplexity <= 0:
            raise ValueError("perplexity must be positive")

    def resolve_learning_rate(self, n_points):
        if self.learning_rate == "auto":
            return max(n_points / self.early_exaggeration / 4.0, 50.0)
        return float(self.learning_rate)


@dataclass(frozen=True)
class TsneEmbedding:
    Y: np.ndarray
    kl: float
    kl_trace: np.ndarray = field(repr=False)


def squared_distances(X):
    X = np.asarray(X, dtype=np.float64)
    return cdist(X, X, "sqeuclidean")


def _row_distribution(d, beta):
    # d excludes the point itself; shift by the minimum for stability
    w = np.exp(-(d - d.min()) * beta)
    total = w.sum()
    p = w / total
    nz = p > 0
    entropy_bits = -(p[nz] * np.log2(p[nz])).sum()
    return p, entropy_bits


def conditional_affinities(X, perplexity, tol=1e-4, max_steps=200):
    """Row-stochastic Gaussian affinities, one bandwidth per point.

    Each point's precision ``beta = 1 / (2 sigma^2)`` is found by bisection so
    that ``2**H`` of its row matches ``perplexity`` within ``tol`` (relative).
    Returns ``(P_conditional, betas, perplexities)``.
    """
    D = squared_distances(X)
    M = D.shape[0]
    if M < 3:
        raise DomainError("t-SNE needs at least 3 points")
    if not perplexity < M:
        raise DomainError(f"perplexity {perplexity} must be below the point count {M}")
    P = np.zeros((M, M))
    betas = np.empty(M)
    achieved = np.empty(M)
    for a in range(M):
        d = np.delete(D[a], a)
        # start from a bandwidth on the scale of this row's distances
        spread = d.mean() - d.min()
        beta = 1.0 / spread if spread > 0 else 1.0
        lo, hi = 0.0, np.inf
        for _ in range(max_steps):
            p, h = _row_distribution(d, beta)
            perp = 2.0 ** h
            if abs(perp - perplexity) <= tol * perplexity:
                break
            if perp > perplexity:
                lo = beta
                beta = beta * 2.0 if hi == np.inf else (lo + hi) / 2.0
            else:
                hi = beta
                beta = (lo + hi) / 2.0
        else:
            raise CalibrationError(
                f"point {a}: perplexity bisection did not converge in {max_steps} steps"
            )
        P[a, np.arange(M) != a] = p
        betas[a] = beta
        achieved[a] = perp
    return P, betas, achieved


def joint_affinities(P_conditional):
    M = P_conditional.shape[0]
    P = (P_conditional + P_conditional.T) / (2.0 * M)
    np.fill_diagonal(P, 0.0)
    return P


def tsne_affinities(X, config=TsneConfig()):
    X = X.X if hasattr(X, "X") else np.asarray(X, dtype=np.float64)
    P_cond, _, _ = conditional_affinities(
        X, config.perplexity, config.perplexity_tol, config.max_bisection
    )
    return joint_affinities(P_cond)


def kl_divergence(p, q):
    """Sum of ``p log(p/q)`` (natural log); zero-probability terms drop out."""
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    if p.shape != q.shape:
        raise DomainError("p and q must have the same support")
    support = p > 0
    if np.any(q[support] <= 0):
        raise DomainError("q is zero where p is positive")
    return float((p[support] * np.log(p[support] / q[support])).sum())


def student_t_affinities(Y):
    """Embedding affinities and the unnormalised kernel ``(1 + d^2)^-1``."""
    kernel = 1.0 / (1.0 + squared_distances(Y))
    np.fill_diagonal(kernel, 0.0)
    return kernel / kernel.sum(), kernel


class _Objective:
    """KL(P || Q(Y)) evaluated without materialising log Q.

    With ``Q = K / Z``: KL = sum P log P - sum P log K + (sum P) log Z, and
    ``log K = -log(1 + d^2)``.
    """

    def __init__(self, P):
        self.P = P
        nz = P > 0
        self.neg_entropy = float((P[nz] * np.log(P[nz])).sum())
        self.mass = float(P.sum())

    def evaluate(self, Y):
        kernel = squared_distances(Y)
        kernel += 1.0
        logs = np.log(kernel)
        logs *= self.P
        np.reciprocal(kernel, out=kernel)
        np.fill_diagonal(kernel, 0.0)
        Z = kernel.sum()
        kl = self.neg_entropy + float(logs.sum()) + self.mass * np.log(Z)
        return kl, kernel, Z


def _gradient(P, kernel, Z, Y):
    W = kernel / -Z
    W += P
    W *= kernel
    return 4.0 * (W.sum(axis=1)[:, None] * Y - W @ Y)


def tsne_objective(P, Y):
    """KL(P || Q(Y)) and its gradient with respect to the embedding."""
    kl, kernel, Z = _Objective(P).evaluate(Y)
    return kl, _gradient(P, kernel, Z, Y)


def tsne_embed(P, config=TsneConfig()):
    """Minimise KL(P || Q) over a 2-D embedding by momentum gradient descent.

    After the early-exaggeration phase a step that raises the divergence is
    undone, the learning rate halved and the momentum buffer cleared, so the
    recorded trace never increases there. ``kl_trace[i]`` is the divergence
    of the iterate kept after update ``i``, measured against the plain ``P``.
    """
    P = np.asarray(P, dtype=np.float64)
    M = P.shape[0]
    if P.shape != (M, M) or not np.allclose(P, P.T) or abs(P.sum() - 1.0) > 1e-8:
        raise DomainError("affinity matrix must be square, symmetric and sum to 1")
    rng = np.random.default_rng(config.seed)
    Y = rng.normal(0.0, 1e-4, size=(M, config.n_components))
    update = np.zeros_like(Y)
    lr = config.resolve_learning_rate(M)
    exaggerated_until = (
        int(round(config.exaggeration_fraction * config.n_iter)) if config.exaggerate else 0
    )
    switch = int(round(config.momentum_switch * config.n_iter))
    trace = np.empty(config.n_iter)
    objective = _Objective(P)
    kl, kernel, Z = objective.evaluate(Y)
    for it in range(config.n_iter):
        exaggerated = it < exaggerated_until
        target = P * config.early_exaggeration if exaggerated else P
        grad = _gradient(target, kernel, Z, Y)
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"non-finite t-SNE gradient at iteration {it}")
        momentum = config.momentum if it < switch else config.final_momentum
        step = momentum * update - lr * grad
        candidate = Y + step
        candidate -= candidate.mean(axis=0)
        kl_new, kernel_new, Z_new = objective.evaluate(candidate)
        if not np.isfinite(kl_new):
            raise NumericError(f"non-finite KL divergence at iteration {it}")
        if not exaggerated and kl_new > kl:
            lr *= 0.5
            update = np.zeros_like(Y)
        else:
            Y, kernel, Z, kl, update = candidate, kernel_new, Z_new, kl_new, step
        trace[it] = kl
    return TsneEmbedding(Y=Y, kl=float(kl), kl_trace=trace)
