"""Two-layer perceptron: Linear -> ReLU -> Linear, softmax cross-entropy, SGD."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, EmptyDataset


def relu(z):
    return np.maximum(z, 0.0)


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(logits, y) -> float:
    """Mean negative log-likelihood of integer labels ``y`` under softmax(logits)."""
    logits = np.atleast_2d(logits)
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    return float(-logp[np.arange(len(y)), y].mean())


def default_hidden(n_in: int, n_out: int) -> int:
    return max(n_in // 2, 2 * n_out, 1)


class Mlp:
    def __init__(self, n_in: int, n_out: int, n_hidden: int | None = None, rng=None, zero: bool = False):
        if n_in < 1 or n_out < 1:
            raise DimensionMismatch("layer sizes must be positive")
        self.n_in, self.n_out = n_in, n_out
        self.n_hidden = n_hidden if n_hidden is not None else default_hidden(n_in, n_out)
        if zero:
            self.W1 = np.zeros((n_in, self.n_hidden))
            self.W2 = np.zeros((self.n_hidden, n_out))
        else:
            rng = np.random.default_rng(rng)
            # He initialisation for the ReLU layer
            self.W1 = rng.normal(0.0, np.sqrt(2.0 / n_in), (n_in, self.n_hidden))
            self.W2 = rng.normal(0.0, np.sqrt(2.0 / self.n_hidden), (self.n_hidden, n_out))
        self.b1 = np.zeros(self.n_hidden)
        self.b2 = np.zeros(n_out)

    @property
    def params(self):
        return [self.W1, self.b1, self.W2, self.b2]

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_in:
            raise DimensionMismatch(f"expected {self.n_in} input features, got {X.shape[1]}")
        return X

    def forward(self, X):
        """Logits for a batch (or a single vector)."""
        X = self._check(X)
        return relu(X @ self.W1 + self.b1) @ self.W2 + self.b2

    def predict_proba(self, X):
        return softmax(self.forward(X))

    def loss(self, X, y) -> float:
        return cross_entropy(self.forward(X), np.asarray(y))

    def gradients(self, X, y):
        """Loss and gradients ``[dW1, db1, dW2, db2]`` of the mean cross-entropy."""
        X = self._check(X)
        y = np.asarray(y)
        n = len(y)
        z1 = X @ self.W1 + self.b1
        a1 = relu(z1)
        logits = a1 @ self.W2 + self.b2
        p = softmax(logits)
        loss = cross_entropy(logits, y)
        dz2 = p
        dz2[np.arange(n), y] -= 1.0
        dz2 /= n
        dW2 = a1.T @ dz2
        db2 = dz2.sum(axis=0)
        da1 = dz2 @ self.W2.T
        dz1 = da1 * (z1 > 0)
        dW1 = X.T @ dz1
        db1 = dz1.sum(axis=0)
        return loss, [dW1, db1, dW2, db2]

    def sgd_step(self, X, y, lr: float) -> float:
        loss, grads = self.gradients(X, y)
        for p, g in zip(self.params, grads):
            p -= lr * g
        return loss

    # persistence ------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n_in": self.n_in, "n_hidden": self.n_hidden, "n_out": self.n_out,
            "W1": self.W1.tolist(), "b1": self.b1.tolist(), "W2": self.W2.tolist(), "b2": self.b2.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Mlp":
        m = cls(d["n_in"], d["n_out"], d["n_hidden"], zero=True)
        m.W1 = np.asarray(d["W1"], dtype=float).reshape(m.n_in, m.n_hidden)
        m.b1 = np.asarray(d["b1"], dtype=float)
        m.W2 = np.asarray(d["W2"], dtype=float).reshape(m.n_hidden, m.n_out)
        m.b2 = np.asarray(d["b2"], dtype=float)
        return m


@dataclass
class TrainConfig:
    lr: float = 0.05
    epochs: int = 100
    batch_size: int = 16
    val_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not 1e-3 <= self.lr <= 1e-1:
            raise ValueError("learning rate must lie in [1e-3, 1e-1]")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("validation fraction must lie in (0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be >= 1")


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    val_acc: list = field(default_factory=list)


def split(n: int, val_fraction: float, rng: np.random.Generator):
    idx = rng.permutation(n)
    n_val = int(round(n * val_fraction))
    if n >= 2:
        n_val = min(max(n_val, 1), n - 1)
    else:
        n_val = 0
    return idx[n_val:], idx[:n_val]


def accuracy(mlp: Mlp, X, y) -> float:
    if len(y) == 0:
        return float("nan")
    return float((mlp.forward(X).argmax(axis=1) == np.asarray(y)).mean())


def train(mlp: Mlp, X, y, config: TrainConfig = TrainConfig()) -> tuple[Mlp, TrainHistory]:
    """Mini-batch SGD over shuffled batches, metrics recorded after each epoch."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if len(y) == 0:
        raise EmptyDataset("no training records")
    if X.ndim != 2 or X.shape[0] != len(y) or X.shape[1] != mlp.n_in:
        raise DimensionMismatch(f"dataset shape {X.shape} does not fit a {mlp.n_in}-input network")
    if y.min() < 0 or y.max() >= mlp.n_out:
        raise DimensionMismatch("label outside the output range")
    rng = np.random.default_rng(config.seed)
    tr, va = split(len(y), config.val_fraction, rng)
    hist = TrainHistory()
    for _ in range(config.epochs):
        order = rng.permutation(tr)
        losses = []
        for k in range(0, len(order), config.batch_size):
            b = order[k:k + config.batch_size]
            losses.append(mlp.sgd_step(X[b], y[b], config.lr) * len(b))
        hist.train_loss.append(sum(losses) / len(order))
        if len(va):
            hist.val_loss.append(mlp.loss(X[va], y[va]))
            hist.val_acc.append(accuracy(mlp, X[va], y[va]))
    return mlp, hist
