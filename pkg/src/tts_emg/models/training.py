from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import NumericError, ShapeError
from ..nn import ClampCounter, adam_step, cross_entropy_loss, softmax, softmax_cross_entropy_backward

# Epochs per (architecture family, database); Baseline on the 2 kHz data converges in 5.
DEFAULT_EPOCHS = {("tts", 1): 10, ("tts", 2): 10, ("baseline", 1): 10, ("baseline", 2): 5}


@dataclass
class TrainConfig:
    epochs: int = 10
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 128
    class_weights: list | None = None
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.class_weights is not None:
            w = np.asarray(self.class_weights, dtype=float)
            if np.any(w < 1):
                raise ValueError("class weights must all be >= 1")

    def to_dict(self):
        d = asdict(self)
        if d["class_weights"] is not None:
            d["class_weights"] = [float(w) for w in d["class_weights"]]
        return d


@dataclass
class TrainReport:
    epoch_losses: list = field(default_factory=list)
    steps: int = 0
    clamped: int = 0


def _arrays(windows):
    if isinstance(windows, tuple):
        X, y = windows
    else:
        X, y = windows.X, windows.y
    return np.asarray(X), np.asarray(y, dtype=np.int64)


def train(network, windows, config: TrainConfig, rng=None):
    """Mini-batch Adam on class-weighted cross-entropy.

    ``windows`` is anything with ``X`` and ``y`` arrays, or an ``(X, y)`` tuple.
    The data order is reshuffled every epoch from ``rng`` (default: seeded by
    ``config.seed``), which also drives noise and dropout.
    """
    X, y = _arrays(windows)
    if len(y) == 0:
        raise ValueError("empty training set")
    M = network.n_classes
    if np.any((y < 0) | (y >= M)):
        raise ValueError(f"training labels must lie in [0, {M})")
    if X.shape[1:3] != network.input_shape[:2]:
        raise ShapeError(f"window shape {X.shape[1:]} != network input {network.input_shape}", "input")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    weights = None
    if config.class_weights is not None:
        weights = np.asarray(config.class_weights, dtype=network.dtype)
        if weights.shape != (M,):
            raise ShapeError(f"{weights.shape[0]} class weights for {M} classes", "classes")

    params = network.params
    report = TrainReport()
    counter = ClampCounter()
    network.train()
    try:
        for _ in range(config.epochs):
            order = rng.permutation(len(y))
            total = 0.0
            for start in range(0, len(y), config.batch_size):
                idx = order[start:start + config.batch_size]
                xb, yb = X[idx], y[idx]
                gamma = 1.0 if weights is None else weights[yb]
                logits = network.forward(xb, mode="train", rng=rng, cache=True)
                probs = softmax(logits)
                losses = cross_entropy_loss(probs, yb, gamma, counter)
                batch_loss = float(np.sum(losses))
                if not np.isfinite(batch_loss):
                    raise NumericError(f"non-finite loss at step {report.steps + 1}")
                total += batch_loss
                grad = softmax_cross_entropy_backward(probs, yb, gamma) / len(yb)
                network.zero_grad()
                network.backward(grad.astype(network.dtype, copy=False))
                report.steps += 1
                adam_step(params, report.steps, config.lr, config.beta1, config.beta2, config.eps)
            report.epoch_losses.append(total / len(y))
    finally:
        network.eval()
    report.clamped = counter.count
    for p in params:
        if not np.all(np.isfinite(p.value)):
            raise NumericError(f"non-finite parameter {p.name} after training")
    return report


def predict(network, window):
    """Class index (ties go to the lowest index) and probability vector."""
    probs = softmax(network.forward(window, mode="infer"))
    return int(np.argmax(probs)), probs


def predict_batch(network, X, batch_size=512):
    """Predicted class of every window in ``X``."""
    out = np.empty(len(X), dtype=np.int64)
    for start in range(0, len(X), batch_size):
        logits = network.forward(np.asarray(X[start:start + batch_size]), mode="infer")
        out[start:start + batch_size] = np.argmax(logits, axis=-1)
    return out
