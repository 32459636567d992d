"""Reference binary classifier: logistic regression by mini-batch gradient descent."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import expit, log_expit

__all__ = ["TrainConfig", "LinearModel", "loss_and_grad", "train", "predict_proba", "predict"]


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.01
    epochs: int = 50
    batch_size: int = 16
    seed: int = 0


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    config: TrainConfig
    feature_shape: tuple[int, ...] = ()
    loss_history: list[float] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.loss_history[-1] if self.loss_history else float("nan")

    def to_json(self) -> str:
        return json.dumps({"weights": self.weights.tolist(), "bias": self.bias,
                           "config": asdict(self.config),
                           "feature_shape": list(self.feature_shape)})

    @classmethod
    def from_json(cls, text: str) -> "LinearModel":
        d = json.loads(text)
        return cls(np.asarray(d["weights"], dtype=np.float64), float(d["bias"]),
                   TrainConfig(**d["config"]), tuple(d.get("feature_shape", ())))


def _flatten(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return X.reshape(X.shape[0], -1)


def loss_and_grad(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray):
    """Mean binary cross-entropy of ``sigmoid(X @ w + b)`` and its gradient."""
    z = X @ w + b
    loss = -np.mean(y * log_expit(z) + (1 - y) * log_expit(-z))
    residual = expit(z) - y
    return float(loss), X.T @ residual / len(y), float(residual.mean())


def train(X, y, config: TrainConfig = TrainConfig()) -> LinearModel:
    """Fit logistic regression from zero weights.

    ``X`` is ``(n_samples, *feature_shape)`` and is flattened row-major;
    batches are reshuffled each epoch from ``config.seed``. The mean training
    loss after every epoch is kept in ``loss_history``.
    """
    X = np.asarray(X)
    feature_shape = tuple(X.shape[1:])
    X = _flatten(X)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise ValueError("one label per sample required")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0/1")
    if len(np.unique(y)) < 2:
        raise ValueError("training needs samples of both classes")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain non-finite values")

    rng = np.random.default_rng(config.seed)
    w = np.zeros(X.shape[1])
    b = 0.0
    history = []
    n = X.shape[0]
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, config.batch_size):
            idx = order[lo:lo + config.batch_size]
            _, gw, gb = loss_and_grad(w, b, X[idx], y[idx])
            w -= config.lr * gw
            b -= config.lr * gb
        history.append(loss_and_grad(w, b, X, y)[0])
    return LinearModel(w, b, config, feature_shape, history)


def predict_proba(model: LinearModel, X) -> np.ndarray | float:
    """``sigmoid(w . x + b)`` for one sample or a leading batch axis."""
    X = np.asarray(X, dtype=np.float64)
    size = model.weights.size
    if X.size == size and (not model.feature_shape or X.shape == model.feature_shape):
        return float(expit(X.reshape(-1) @ model.weights + model.bias))
    if X.ndim < 2 or X[0].size != size:
        raise ValueError(f"input shape {X.shape} does not match {size} model weights")
    return expit(_flatten(X) @ model.weights + model.bias)


def predict(model: LinearModel, X, threshold: float = 0.5):
    return (np.asarray(predict_proba(model, X)) >= threshold).astype(np.int64)
