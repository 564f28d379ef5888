"""Layer objects wrapping the functional primitives.

Each layer caches what its backward pass needs only when ``forward`` is called
with ``cache=True``; with ``cache=False`` a layer is read-only, so a frozen
network can serve concurrent inference.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from . import functional as F
from .init import conv_fans, glorot_uniform_init
from .optim import Parameter


class Layer:
    kind = "layer"
    params: list[Parameter] = []

    def output_shape(self, input_shape):
        return input_shape

    def forward(self, x, mode="infer", rng=None, cache=False):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def preactivations(self):
        """Cached LReLU inputs from the last caching forward pass."""
        return []

    @property
    def num_params(self):
        return sum(p.size for p in self.params)


def _activate(z, activation, alpha):
    if activation == "lrelu":
        return F.lrelu(z, alpha)
    if activation == "linear":
        return z
    raise ValueError(f"unknown activation {activation!r}")


def _activate_backward(grad, z, activation, alpha):
    if activation == "lrelu":
        return F.lrelu_backward(grad, z, alpha)
    return grad


class GaussianNoise(Layer):
    kind = "noise"

    def __init__(self, sigma):
        self.sigma = sigma
        self.params = []

    def forward(self, x, mode="infer", rng=None, cache=False):
        return F.gaussian_noise(x, self.sigma, mode, rng)

    def backward(self, grad):
        return grad


class Conv2D(Layer):
    kind = "conv"

    def __init__(self, in_depth, spec: F.ConvSpec, activation="lrelu", alpha=0.3,
                 role=None, rng=None, dtype=np.float64, name="conv"):
        self.spec = spec
        self.in_depth = in_depth
        self.activation = activation
        self.alpha = alpha
        self.role = role
        self.name = name
        shape = (spec.filter_rows, spec.filter_cols, in_depth, spec.num_filters)
        if rng is None:
            w = np.zeros(shape, dtype=dtype)
        else:
            fan_in, fan_out = conv_fans(spec.filter_rows, spec.filter_cols, in_depth, spec.num_filters)
            w = glorot_uniform_init(shape, fan_in, fan_out, rng, dtype)
        self.weight = Parameter(w, f"{name}.weight")
        self.bias = Parameter(np.zeros(spec.num_filters, dtype=dtype), f"{name}.bias")
        self.params = [self.weight, self.bias]
        self.input_grad = True  # cleared when nothing upstream consumes the input gradient
        self._x = self._z = None

    def output_shape(self, input_shape):
        r, c, d = input_shape
        if d != self.in_depth:
            raise ShapeError(f"{self.name}: input depth {d} != {self.in_depth}", "depth")
        out_r, out_c = self.spec.output_shape(r, c)
        return out_r, out_c, self.spec.num_filters

    def forward(self, x, mode="infer", rng=None, cache=False):
        z = F.conv2d_forward(x, self.weight.value, self.bias.value, self.spec)
        if cache:
            self._x, self._z = x, z
        return _activate(z, self.activation, self.alpha)

    def backward(self, grad):
        gz = _activate_backward(grad, self._z, self.activation, self.alpha)
        dx, dw, db = F.conv2d_backward(gz, self._x, self.weight.value, self.spec, self.input_grad)
        self.weight.grad += dw
        self.bias.grad += db
        return dx

    def preactivations(self):
        return [self._z] if self.activation == "lrelu" and self._z is not None else []


class TemporalFire(Layer):
    """Squeeze 1x1 conv feeding parallel 1x1 and 3x1 expand convs, depth-concatenated."""

    kind = "fire"

    def __init__(self, in_depth, squeeze, expand1, expand3, alpha=0.3, rng=None,
                 dtype=np.float64, name="fire"):
        self.in_depth = in_depth
        self.squeeze_filters, self.expand1_filters, self.expand3_filters = squeeze, expand1, expand3
        self.name = name
        self.squeeze = Conv2D(in_depth, F.ConvSpec(1, 1, squeeze), "lrelu", alpha, rng=rng,
                              dtype=dtype, name=f"{name}.squeeze")
        self.expand1 = Conv2D(squeeze, F.ConvSpec(1, 1, expand1), "lrelu", alpha, rng=rng,
                              dtype=dtype, name=f"{name}.expand1")
        self.expand3 = Conv2D(squeeze, F.ConvSpec(3, 1, expand3), "lrelu", alpha, rng=rng,
                              dtype=dtype, name=f"{name}.expand3")
        self.params = self.squeeze.params + self.expand1.params + self.expand3.params

    def output_shape(self, input_shape):
        r, c, _ = self.squeeze.output_shape(input_shape)
        return r, c, self.expand1_filters + self.expand3_filters

    def forward(self, x, mode="infer", rng=None, cache=False):
        s = self.squeeze.forward(x, mode, rng, cache)
        a = self.expand1.forward(s, mode, rng, cache)
        b = self.expand3.forward(s, mode, rng, cache)
        return np.concatenate([a, b], axis=-1)

    def backward(self, grad):
        ga = grad[..., :self.expand1_filters]
        gb = grad[..., self.expand1_filters:]
        gs = self.expand1.backward(ga) + self.expand3.backward(gb)
        return self.squeeze.backward(gs)

    def preactivations(self):
        return self.squeeze.preactivations() + self.expand1.preactivations() + self.expand3.preactivations()


class Dropout(Layer):
    kind = "dropout"

    def __init__(self, rate):
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
        self.rate = rate
        self.params = []
        self._mask = None

    def forward(self, x, mode="infer", rng=None, cache=False):
        y, mask = F.dropout(x, self.rate, mode, rng)
        if cache:
            self._mask = mask
        return y

    def backward(self, grad):
        return F.dropout_backward(grad, self._mask)


class Flatten(Layer):
    kind = "flatten"

    def __init__(self):
        self.params = []
        self._shape = None

    def output_shape(self, input_shape):
        return (int(np.prod(input_shape)),)

    def forward(self, x, mode="infer", rng=None, cache=False):
        if cache:
            self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._shape)


class Dense(Layer):
    kind = "dense"

    def __init__(self, n_in, n_out, activation="lrelu", alpha=0.3, rng=None,
                 dtype=np.float64, name="dense"):
        self.n_in, self.n_out = n_in, n_out
        self.activation = activation
        self.alpha = alpha
        self.name = name
        if rng is None:
            w = np.zeros((n_in, n_out), dtype=dtype)
        else:
            w = glorot_uniform_init((n_in, n_out), n_in, n_out, rng, dtype)
        self.weight = Parameter(w, f"{name}.weight")
        self.bias = Parameter(np.zeros(n_out, dtype=dtype), f"{name}.bias")
        self.params = [self.weight, self.bias]
        self.input_grad = True  # cleared when nothing upstream consumes the input gradient
        self._x = self._z = None

    def output_shape(self, input_shape):
        if int(np.prod(input_shape)) != self.n_in:
            raise ShapeError(f"{self.name}: {int(np.prod(input_shape))} inputs != {self.n_in}", "inputs")
        return (self.n_out,)

    def forward(self, x, mode="infer", rng=None, cache=False):
        z = F.dense_forward(x, self.weight.value, self.bias.value)
        if cache:
            self._x, self._z = x, z
        return _activate(z, self.activation, self.alpha)

    def backward(self, grad):
        gz = _activate_backward(grad, self._z, self.activation, self.alpha)
        dx, dw, db = F.dense_backward(gz, self._x, self.weight.value)
        self.weight.grad += dw
        self.bias.grad += db
        return dx

    def preactivations(self):
        return [self._z] if self.activation == "lrelu" and self._z is not None else []
