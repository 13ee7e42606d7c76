"""Fully connected network with a sigmoid output unit."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import SpecError
from .linear import sigmoid
from .sgd import train_sgd

ACTIVATIONS = ("tanh", "relu", "logistic", "identity")


def _activate(name, z):
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "logistic":
        return sigmoid(z)
    if name == "identity":
        return z
    raise SpecError(f"unknown activation {name!r}")


def _activation_slope(name, a):
    # in terms of the activation output a
    if name == "tanh":
        return 1.0 - a * a
    if name == "relu":
        return (a > 0).astype(np.float64)
    if name == "logistic":
        return a * (1.0 - a)
    return np.ones_like(a)


@dataclass(frozen=True)
class Mlp:
    weights: tuple  # layer l maps width[l] -> width[l + 1]
    biases: tuple
    activation: str = "relu"

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise SpecError("weights and biases must be non-empty and of equal length")
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.ndim != 2 or b.shape != (W.shape[1],):
                raise SpecError(f"layer {l}: bias shape {b.shape} does not fit weights {W.shape}")
            if l and W.shape[0] != self.weights[l - 1].shape[1]:
                raise SpecError(f"layer {l}: input width {W.shape[0]} does not match "
                                f"previous output width {self.weights[l - 1].shape[1]}")
        if self.weights[-1].shape[1] != 1:
            raise SpecError("the last layer must have a single output")

    @property
    def params(self):
        return [a for pair in zip(self.weights, self.biases) for a in pair]

    @classmethod
    def from_params(cls, params, activation):
        return cls(tuple(params[0::2]), tuple(params[1::2]), activation)

    def score(self, X):
        return mlp_forward_backward(self, X).scores


class Pass(NamedTuple):
    scores: np.ndarray
    loss: float
    grads: list  # aligned with ``params``; None without labels


def init_mlp(n_inputs, hidden_sizes, activation="relu", seed=0):
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    widths = [n_inputs, *hidden_sizes, 1]
    weights, biases = [], []
    for a, b in zip(widths[:-1], widths[1:]):
        bound = np.sqrt(6.0 / (a + b))
        weights.append(rng.uniform(-bound, bound, size=(a, b)))
        biases.append(np.zeros(b))
    return Mlp(tuple(weights), tuple(biases), activation)


def mlp_forward_backward(net, X, y=None, alpha=0.0):
    """Scores, and with labels the loss and its gradients.

    Loss is the mean log-loss plus ``alpha / (2 n)`` times the summed squared
    weights (biases unpenalised), ``n`` being the batch size.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != net.weights[0].shape[0]:
        raise SpecError(f"input of shape {X.shape} does not fit a net with "
                        f"{net.weights[0].shape[0]} inputs")
    acts = [X]
    last = len(net.weights) - 1
    for l, (W, b) in enumerate(zip(net.weights, net.biases)):
        z = acts[-1] @ W + b
        acts.append(z if l == last else _activate(net.activation, z))
    logit = acts[-1][:, 0]
    scores = sigmoid(logit)
    if y is None:
        return Pass(scores, float("nan"), None)
    y = np.asarray(y, dtype=np.float64)
    n = len(X)
    penalty = 0.5 * alpha * sum((W ** 2).sum() for W in net.weights) / n
    loss = float(np.mean(np.logaddexp(0.0, logit) - y * logit)) + penalty
    delta = ((scores - y) / n)[:, None]
    grads = [None] * (2 * len(net.weights))
    for l in range(last, -1, -1):
        W = net.weights[l]
        grads[2 * l] = acts[l].T @ delta + alpha * W / n
        grads[2 * l + 1] = delta.sum(axis=0)
        if l:
            delta = (delta @ W.T) * _activation_slope(net.activation, acts[l])
    return Pass(scores, loss, grads)


def fit_mlp(X, y, hidden_sizes=(100,), activation="relu", alpha=1e-4, learning_rate=1e-3,
            batch_size=200, epochs=10, max_steps=None, momentum=0.9, seed=0):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if activation not in ACTIVATIONS:
        raise SpecError(f"unknown activation {activation!r}")
    net = init_mlp(X.shape[1], hidden_sizes, activation, seed)
    params = [p.copy() for p in net.params]

    def loss_and_grads(ps, Xb, yb):
        out = mlp_forward_backward(Mlp.from_params(ps, activation), Xb, yb, alpha)
        return out.loss, out.grads

    trace = train_sgd(params, loss_and_grads, X, y, learning_rate, batch_size, epochs,
                      max_steps, momentum, seed)
    return Mlp.from_params(params, activation), trace
