"""Mini-batch gradient descent with momentum and seeded shuffling."""

import numpy as np

from ..errors import NumericError, SpecError


def train_sgd(params, loss_and_grads, X, y, learning_rate, batch_size=200, epochs=10,
              max_steps=None, momentum=0.9, seed=0):
    """Update ``params`` (a list of arrays) in place.

    ``loss_and_grads(params, Xb, yb)`` returns ``(loss, grads)`` with grads
    aligned to params. Each epoch visits a fresh permutation drawn from a
    generator seeded with ``seed``. Returns the per-step loss trace.
    """
    if learning_rate <= 0 or batch_size < 1 or epochs < 1:
        raise SpecError("learning_rate, batch_size and epochs must be positive")
    rng = np.random.default_rng(seed)
    velocity = [np.zeros_like(p) for p in params]
    n = len(X)
    batch_size = min(batch_size, n)
    trace = []
    step = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            if max_steps is not None and step >= max_steps:
                return np.array(trace)
            rows = order[start:start + batch_size]
            loss, grads = loss_and_grads(params, X[rows], y[rows])
            if not np.isfinite(loss):
                raise NumericError(f"training loss is not finite at step {step}")
            for p, v, g in zip(params, velocity, grads):
                v *= momentum
                v -= learning_rate * g
                p += v
            trace.append(loss)
            step += 1
    return np.array(trace)
