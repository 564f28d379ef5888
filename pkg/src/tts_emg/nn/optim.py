from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Parameter:
    """Trainable array with its gradient and Adam moment accumulators."""

    value: np.ndarray
    name: str = ""
    grad: np.ndarray = field(init=False)
    m: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)

    def __post_init__(self):
        self.grad = np.zeros_like(self.value)
        self.m = np.zeros_like(self.value)
        self.v = np.zeros_like(self.value)

    @property
    def size(self):
        return self.value.size

    def zero_grad(self):
        self.grad[...] = 0


def adam_step(params, t, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update, in place.

    ``t`` is the 1-based step count. Gradients are read, not cleared.
    """
    if t < 1:
        raise ValueError(f"Adam step index must be >= 1, got {t}")
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for p in params:
        g = p.grad
        p.m *= beta1
        p.m += (1.0 - beta1) * g
        p.v *= beta2
        p.v += (1.0 - beta2) * (g * g)
        m_hat = p.m / c1
        v_hat = p.v / c2
        p.value -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(p.value.dtype, copy=False)
