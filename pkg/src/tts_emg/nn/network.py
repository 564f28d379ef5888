from __future__ import annotations

import copy

import numpy as np

from ..errors import ShapeError
from . import functional as F


class Network:
    """Ordered stack of layers producing class logits.

    ``mode`` is ``"train"`` (noise and dropout active) or ``"infer"``.
    """

    def __init__(self, layers, input_shape, n_classes, architecture=None, seed=None):
        self.layers = list(layers)
        self.input_shape = tuple(input_shape)
        self.n_classes = n_classes
        self.architecture = architecture
        self.seed = seed
        self.mode = "infer"
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.output_shape(shape)
        if shape != (n_classes,):
            raise ShapeError(f"network output shape {shape} != ({n_classes},)", "classes")
        self.set_input_gradient(False)

    def set_input_gradient(self, enabled):
        """Toggle computing the gradient with respect to the network input.

        Off by default: the first weighted layer then skips its input adjoint
        and :meth:`backward` returns ``None``.
        """
        for layer in self.layers:
            if layer.params:
                if hasattr(layer, "input_grad"):
                    layer.input_grad = bool(enabled)
                break

    @property
    def params(self):
        return [p for layer in self.layers for p in layer.params]

    @property
    def dtype(self):
        params = self.params
        return params[0].value.dtype if params else np.dtype(np.float64)

    def count_parameters(self):
        return sum(p.size for p in self.params)

    def train(self):
        self.mode = "train"
        return self

    def eval(self):
        self.mode = "infer"
        return self

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def _batch(self, x):
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 2 or (x.ndim == 3 and x.shape[1:] == self.input_shape[:2]):
            x = x[..., None]
        single = x.ndim == 3
        if single:
            x = x[None]
        if x.shape[1:] != self.input_shape:
            raise ShapeError(f"input shape {x.shape[1:]} != network input {self.input_shape}", "input")
        return x, single

    def forward(self, x, mode=None, rng=None, cache=False):
        """Return logits for a window or a batch of windows."""
        mode = self.mode if mode is None else mode
        if mode == "train" and rng is None:
            raise ValueError("training-mode forward needs an explicit rng")
        h, single = self._batch(x)
        for layer in self.layers:
            h = layer.forward(h, mode, rng, cache)
        return h[0] if single else h

    def backward(self, grad_logits):
        g = grad_logits[None] if grad_logits.ndim == 1 else grad_logits
        for layer in reversed(self.layers):
            g = layer.backward(g)
            if g is None:
                break
        return g

    def predict_proba(self, x):
        return F.softmax(self.forward(x, mode="infer"))

    def trace(self, x):
        """Inference-mode outputs of every layer, input first."""
        h, _ = self._batch(x)
        outs = [h]
        for layer in self.layers:
            h = layer.forward(h, "infer", None, False)
            outs.append(h)
        return outs

    def preactivation_signs(self):
        parts = [z.ravel() >= 0 for layer in self.layers for z in layer.preactivations()]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=bool)

    def layer_summary(self):
        """Rows of ``(name, output_shape, num_params)`` for every layer."""
        rows = [("input", self.input_shape, 0)]
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.output_shape(shape)
            rows.append((getattr(layer, "name", layer.kind), shape, layer.num_params))
        return rows

    def astype(self, dtype):
        """Deep copy with every parameter and moment cast to ``dtype``."""
        clone = copy.deepcopy(self)
        for p in clone.params:
            for attr in ("value", "grad", "m", "v"):
                setattr(p, attr, getattr(p, attr).astype(dtype))
        return clone
