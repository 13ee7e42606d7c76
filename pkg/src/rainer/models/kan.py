"""Kolmogorov-Arnold network: every edge carries a learnable univariate
function, a B-spline on a uniform grid over [-1, 1] plus a weighted base
activation. Edge outputs are summed into each unit."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import SpecError
from .linear import sigmoid
from .sgd import train_sgd


def knots(grid_size, degree):
    h = 2.0 / grid_size
    return -1.0 + h * np.arange(-degree, grid_size + degree + 1)


def bspline_basis(x, grid_size=8, degree=2):
    """Cox-de Boor basis on uniform knots extended ``degree`` cells past
    [-1, 1]. Returns ``(values, derivatives)``, each of shape
    ``x.shape + (grid_size + degree,)``. ``x`` must lie in [-1, 1].
    """
    x = np.asarray(x, dtype=np.float64)
    if grid_size < 1 or degree < 0:
        raise SpecError("grid_size must be >= 1 and degree >= 0")
    if np.any(np.abs(x) > 1.0):
        raise SpecError("spline inputs must lie in [-1, 1]")
    t = knots(grid_size, degree)
    h = 2.0 / grid_size
    n_cells = len(t) - 1
    # compare against the knots themselves so rounding never picks a cell whose
    # left knot lies above x; the right endpoint joins the last inner cell
    cell = np.clip(np.searchsorted(t, x, side="right") - 1, degree, degree + grid_size - 1)
    B = (cell[..., None] == np.arange(n_cells)).astype(np.float64)
    dB = np.zeros_like(B)
    xe = x[..., None]
    for p in range(1, degree + 1):
        count = n_cells - p
        left = (xe - t[:count]) / (p * h)
        right = (t[p + 1:p + 1 + count] - xe) / (p * h)
        lower, upper = B[..., :count], B[..., 1:count + 1]
        if p == degree:
            dB = (lower - upper) / h
        B = left * lower + right * upper
    return B, dB


def _base(name, x):
    if name == "silu":
        s = sigmoid(x)
        return x * s, s * (1.0 + x * (1.0 - s))
    if name == "relu":
        return np.maximum(x, 0.0), (x > 0).astype(np.float64)
    raise SpecError(f"unknown KAN base activation {name!r}")


@dataclass(frozen=True)
class KanLayer:
    base_w: np.ndarray  # (inputs, outputs)
    coef: np.ndarray  # (inputs, outputs, grid_size + degree)


@dataclass(frozen=True)
class Kan:
    layers: tuple
    grid_size: int = 8
    degree: int = 2
    activation: str = "silu"
    lower: np.ndarray = None  # input scaling to [-1, 1]; None means identity
    upper: np.ndarray = None

    def __post_init__(self):
        k = self.grid_size + self.degree
        for l, layer in enumerate(self.layers):
            d, h = layer.base_w.shape
            if layer.coef.shape != (d, h, k):
                raise SpecError(f"layer {l}: coefficients {layer.coef.shape} do not fit "
                                f"base weights {layer.base_w.shape} with {k} basis functions")
            if l and d != self.layers[l - 1].base_w.shape[1]:
                raise SpecError(f"layer {l}: input width {d} does not match the previous layer")

    @property
    def params(self):
        return [a for layer in self.layers for a in (layer.base_w, layer.coef)]

    def with_params(self, params):
        layers = tuple(KanLayer(params[i], params[i + 1]) for i in range(0, len(params), 2))
        return Kan(layers, self.grid_size, self.degree, self.activation, self.lower, self.upper)

    def scale(self, X):
        X = np.asarray(X, dtype=np.float64)
        if self.lower is None:
            return X
        span = np.where(self.upper > self.lower, self.upper - self.lower, 1.0)
        return 2.0 * (X - self.lower) / span - 1.0

    def score(self, X):
        return kan_forward_backward(self, self.scale(X)).scores


class KanPass(NamedTuple):
    scores: np.ndarray  # sigmoid of the output for log-loss, the raw output for mse
    loss: float
    grads: list


def _layer_forward(net, layer, X):
    Xc = np.clip(X, -1.0, 1.0)
    B, dB = bspline_basis(Xc, net.grid_size, net.degree)
    base, dbase = _base(net.activation, X)
    n, d = X.shape
    k = B.shape[-1]
    h = layer.base_w.shape[1]
    out = base @ layer.base_w + B.reshape(n, d * k) @ layer.coef.reshape(d * k, h)
    return out, (X, B, dB, base, dbase)


def kan_forward_backward(net, X, y=None, loss="logloss"):
    """Forward pass on inputs already in the spline domain, plus gradients
    when labels are given. Inputs outside [-1, 1] are clamped for the spline
    term, so they get no spline gradient."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != net.layers[0].base_w.shape[0]:
        raise SpecError(f"input of shape {X.shape} does not fit a KAN with "
                        f"{net.layers[0].base_w.shape[0]} inputs")
    if loss not in ("logloss", "mse"):
        raise SpecError(f"unknown loss {loss!r}")
    caches = []
    out = X
    for layer in net.layers:
        out, cache = _layer_forward(net, layer, out)
        caches.append(cache)
    if out.shape[1] != 1:
        raise SpecError("the last KAN layer must have a single output")
    f = out[:, 0]
    scores = sigmoid(f) if loss == "logloss" else f
    if y is None:
        return KanPass(scores, float("nan"), None)
    y = np.asarray(y, dtype=np.float64)
    n = len(X)
    if loss == "logloss":
        value = float(np.mean(np.logaddexp(0.0, f) - y * f))
        G = ((scores - y) / n)[:, None]
    else:
        value = float(np.mean((f - y) ** 2))
        G = (2.0 * (f - y) / n)[:, None]
    grads = [None] * (2 * len(net.layers))
    for l in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[l]
        Xl, B, dB, base, dbase = caches[l]
        d, h, k = layer.coef.shape
        grads[2 * l] = base.T @ G
        grads[2 * l + 1] = (B.reshape(n, d * k).T @ G).reshape(d, h, k)
        if l:
            inside = (np.abs(Xl) <= 1.0).astype(np.float64)
            # sum_j G[n, j] * sum_k coef[i, j, k] dB[n, i, k]
            spline_slope = np.einsum("nik,ijk,nj->ni", dB, layer.coef, G)
            G = (G @ layer.base_w.T) * dbase + spline_slope * inside
    return KanPass(scores, value, grads)


def init_kan(widths, grid_size=8, degree=2, activation="silu", seed=0,
             lower=None, upper=None):
    rng = np.random.default_rng(seed)
    k = grid_size + degree
    layers = []
    for a, b in zip(widths[:-1], widths[1:]):
        bound = np.sqrt(6.0 / (a + b))
        layers.append(KanLayer(rng.uniform(-bound, bound, size=(a, b)),
                               rng.normal(0.0, 0.1 / np.sqrt(a), size=(a, b, k))))
    return Kan(tuple(layers), grid_size, degree, activation, lower, upper)


def fit_kan(X, y, hidden_dim=64, Q=2, grid_size=8, activation="silu", learning_rate=1e-3,
            batch_size=200, epochs=10, max_steps=None, momentum=0.9, loss="logloss", seed=0,
            scale_inputs=True):
    """Two-layer KAN (inputs -> hidden_dim -> 1). ``Q`` is the spline degree.

    With ``scale_inputs`` the training min/max map each column onto [-1, 1];
    unseen values beyond that range are clamped by the spline term.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if hidden_dim < 1 or Q < 0:
        raise SpecError("hidden_dim must be >= 1 and Q >= 0")
    lower = X.min(axis=0) if scale_inputs else None
    upper = X.max(axis=0) if scale_inputs else None
    net = init_kan([X.shape[1], int(hidden_dim), 1], grid_size, int(Q), activation, seed,
                   lower, upper)
    Xs = net.scale(X)
    params = [p.copy() for p in net.params]

    def loss_and_grads(ps, Xb, yb):
        out = kan_forward_backward(net.with_params(ps), Xb, yb, loss)
        return out.loss, out.grads

    trace = train_sgd(params, loss_and_grads, Xs, y, learning_rate, batch_size, epochs,
                      max_steps, momentum, seed)
    return net.with_params(params), trace
