"""Small softmax classifier with an optional ReLU hidden layer, trained by SGD.

With ``hidden_dim == 0`` the model is multinomial logistic regression and the
embedding is the identity on input features. Otherwise the hidden ReLU
activations serve as the learned embedding.

All losses are soft-target cross-entropies averaged over the batch; gradients
are returned as a dict keyed like ``Classifier.params``.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError, TrainingDivergedError
from .types import Dataset, one_hot_rows


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


class Classifier:
    def __init__(self, params, hidden_dim):
        self.params = params
        self.hidden_dim = hidden_dim

    @classmethod
    def init(cls, dim, num_classes, hidden_dim=0, seed=0, zero=False):
        """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization, or all zeros."""
        rng = np.random.default_rng(seed)

        def layer(fan_in, fan_out):
            if zero:
                return np.zeros((fan_in, fan_out)), np.zeros(fan_out)
            bound = 1.0 / np.sqrt(fan_in)
            return (
                rng.uniform(-bound, bound, size=(fan_in, fan_out)),
                rng.uniform(-bound, bound, size=fan_out),
            )

        if hidden_dim == 0:
            W, b = layer(dim, num_classes)
            return cls({"W": W, "b": b}, 0)
        W1, b1 = layer(dim, hidden_dim)
        W2, b2 = layer(hidden_dim, num_classes)
        return cls({"W1": W1, "b1": b1, "W2": W2, "b2": b2}, hidden_dim)

    @property
    def input_dim(self):
        return (self.params["W"] if self.hidden_dim == 0 else self.params["W1"]).shape[0]

    @property
    def num_classes(self):
        return self.params["b" if self.hidden_dim == 0 else "b2"].shape[0]

    def copy(self):
        return Classifier({k: v.copy() for k, v in self.params.items()}, self.hidden_dim)

    def _check(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.input_dim:
            raise ShapeError(f"model expects {self.input_dim} features, got {X.shape[1]}")
        return X

    def embed(self, X):
        X = self._check(X)
        if self.hidden_dim == 0:
            return X.copy()
        return np.maximum(X @ self.params["W1"] + self.params["b1"], 0.0)

    def logits(self, X):
        X = self._check(X)
        if self.hidden_dim == 0:
            return X @ self.params["W"] + self.params["b"]
        return self.embed(X) @ self.params["W2"] + self.params["b2"]

    def predict_proba(self, X):
        return softmax(self.logits(X))

    def predict(self, X):
        # np.argmax returns the first maximum: ties go to the lowest class index
        return np.argmax(self.predict_proba(X), axis=1)

    def loss_and_grad(self, X, targets):
        """Mean soft cross-entropy ``-mean_b sum_c t_bc log p(c|x_b)`` and its gradient."""
        X = self._check(X)
        T = np.asarray(targets, dtype=np.float64)
        n = X.shape[0]
        if self.hidden_dim == 0:
            z = X @ self.params["W"] + self.params["b"]
        else:
            pre = X @ self.params["W1"] + self.params["b1"]
            H = np.maximum(pre, 0.0)
            z = H @ self.params["W2"] + self.params["b2"]
        logp = log_softmax(z)
        loss = -(T * logp).sum() / n
        # d/dz of sum_c t_c * (-log p_c) is p * sum(t) - t
        dz = (np.exp(logp) * T.sum(axis=1, keepdims=True) - T) / n
        if self.hidden_dim == 0:
            grads = {"W": X.T @ dz, "b": dz.sum(axis=0)}
        else:
            dH = dz @ self.params["W2"].T
            dpre = dH * (pre > 0)
            grads = {
                "W1": X.T @ dpre,
                "b1": dpre.sum(axis=0),
                "W2": H.T @ dz,
                "b2": dz.sum(axis=0),
            }
        return float(loss), grads


def cross_entropy(model: Classifier, X, labels):
    return model.loss_and_grad(X, one_hot_rows(labels, model.num_classes))


class SGD:
    """SGD with heavy-ball momentum and L2 weight decay added to the gradient.

    Update per parameter: ``v <- momentum * v + (g + weight_decay * theta)``;
    ``theta <- theta - lr * v``. On the first step (v = 0) this is
    ``theta - lr * (g + weight_decay * theta)``.
    """

    def __init__(self, lr, momentum=0.9, weight_decay=5e-4):
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.velocity = {}

    def step(self, model: Classifier, grads):
        sgd_step(model, grads, self.lr, self.velocity, self.momentum, self.weight_decay)


def sgd_step(model: Classifier, grads, lr, velocity=None, momentum=0.9, weight_decay=5e-4):
    """Apply one update to ``model`` in place and return it.

    ``velocity`` is the momentum buffer dict, updated in place; pass None for a
    momentum-free step.
    """
    if set(grads) != set(model.params):
        raise ShapeError(f"gradient keys {sorted(grads)} do not match parameters")
    for name, g in grads.items():
        theta = model.params[name]
        if g.shape != theta.shape:
            raise ShapeError(f"gradient for {name} has shape {g.shape}, expected {theta.shape}")
        if not np.all(np.isfinite(g)):
            raise TrainingDivergedError(f"non-finite gradient for {name}")
        d = g + weight_decay * theta
        if velocity is not None:
            v = velocity.get(name)
            v = d.copy() if v is None else momentum * v + d
            velocity[name] = v
            d = v
        theta -= lr * d
        if not np.all(np.isfinite(theta)):
            raise TrainingDivergedError(f"parameter {name} became non-finite")
    return model


def train_epoch_ce(model, opt, X, labels, batch_size, rng, epoch=None):
    """One shuffled pass of mini-batch cross-entropy training; returns the mean loss."""
    n = X.shape[0]
    order = rng.permutation(n)
    losses = []
    for b, start in enumerate(range(0, n, batch_size)):
        idx = order[start:start + batch_size]
        loss, grads = cross_entropy(model, X[idx], labels[idx])
        if not np.isfinite(loss):
            raise TrainingDivergedError(f"non-finite loss at epoch {epoch}, batch {b}")
        opt.step(model, grads)
        losses.append(loss)
    return float(np.mean(losses))


def warmup(model, dataset: Dataset, epochs, lr, batch_size, seed=0, momentum=0.9,
           weight_decay=5e-4, opt=None, rng=None, history=None):
    """Cross-entropy training on every sample with its given label.

    Trains ``model`` in place and returns it. ``opt`` and ``rng`` let a caller
    continue an existing optimizer state and random stream; per-epoch mean
    losses are appended to ``history`` when given.
    """
    opt = opt or SGD(lr, momentum, weight_decay)
    rng = rng if rng is not None else np.random.default_rng(seed)
    X, y = dataset.features, dataset.given_labels
    for e in range(epochs):
        loss = train_epoch_ce(model, opt, X, y, batch_size, rng, epoch=e)
        if history is not None:
            history.append(loss)
    return model
