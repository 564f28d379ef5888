"""Layer-by-layer descriptions of the TtS and Baseline networks.

An :class:`ArchitectureSpec` is plain data (JSON-serialisable), so checkpoints
can rebuild the exact network. :func:`build_network` instantiates it.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ShapeError
from ..nn import Conv2D, ConvSpec, Dense, Dropout, Flatten, GaussianNoise, Network, TemporalFire

NOISE_STD = 0.001
DROPOUT_RATE = 0.5
LRELU_SLOPE = 0.3


@dataclass(frozen=True)
class TemporalFireSpec:
    squeeze_filters: int
    expand1_filters: int
    expand3_filters: int

    @property
    def output_depth(self):
        return self.expand1_filters + self.expand3_filters


@dataclass
class ArchitectureSpec:
    name: str
    family: str  # "tts" or "baseline"
    input_shape: tuple
    n_classes: int
    layers: list = field(default_factory=list)
    lrelu_slope: float = LRELU_SLOPE

    def __post_init__(self):
        self.input_shape = tuple(self.input_shape)
        if self.family == "tts":
            self._check_temporal_layout()

    def _check_temporal_layout(self):
        n_channels = self.input_shape[1]
        spatial = [d for d in self.layers if d["type"] == "conv" and d.get("role") == "spatial"]
        if len(spatial) != 1:
            raise ValueError("a TtS architecture needs exactly one spatial conv")
        if spatial[0]["size"][1] != n_channels:
            raise ValueError(f"spatial conv must span all {n_channels} channels")
        for d in self.layers:
            if d is spatial[0]:
                break
            if d["type"] == "conv" and d["size"][1] != 1:
                raise ValueError("convs before the spatial conv must be temporal-only (N x 1)")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["input_shape"] = tuple(data["input_shape"])
        return cls(**data)


def _div(n, divisor):
    return max(1, n // divisor)


def build_tts_spec(n_samples, n_channels, n_classes, temporal_size=3, temporal_stride=1,
                   width_divisor=1, name=None):
    """TtS layout for arbitrary window size; filter and hidden unit counts are divided by ``width_divisor``."""
    d = width_divisor
    layers = [
        {"type": "noise", "sigma": NOISE_STD},
        {"type": "conv", "filters": _div(64, d), "size": [temporal_size, 1],
         "stride": [temporal_stride, 1], "role": "temporal"},
        {"type": "fire", "squeeze": _div(32, d), "expand1": _div(64, d), "expand3": _div(64, d)},
        {"type": "conv", "filters": _div(32, d), "size": [3, n_channels], "stride": [1, 1],
         "role": "spatial"},
        {"type": "flatten"},
        {"type": "dropout", "rate": DROPOUT_RATE},
        {"type": "dense", "units": _div(128, d), "activation": "lrelu"},
        {"type": "dropout", "rate": DROPOUT_RATE},
        {"type": "dense", "units": n_classes, "activation": "softmax"},
    ]
    return ArchitectureSpec(name or f"tts_{n_samples}x{n_channels}", "tts",
                            (n_samples, n_channels, 1), n_classes, layers)


def build_baseline_spec(n_samples, n_channels, n_classes, first_size=3, first_stride=1,
                        width_divisor=1, name=None):
    d = width_divisor
    layers = [
        {"type": "noise", "sigma": NOISE_STD},
        {"type": "conv", "filters": _div(128, d), "size": [first_size, 3], "stride": [first_stride, 1]},
        {"type": "conv", "filters": _div(64, d), "size": [5, 3], "stride": [1, 1]},
        {"type": "conv", "filters": _div(32, d), "size": [5, 3], "stride": [1, 1]},
        {"type": "flatten"},
        {"type": "dropout", "rate": DROPOUT_RATE},
        {"type": "dense", "units": _div(128, d), "activation": "lrelu"},
        {"type": "dropout", "rate": DROPOUT_RATE},
        {"type": "dense", "units": n_classes, "activation": "softmax"},
    ]
    return ArchitectureSpec(name or f"baseline_{n_samples}x{n_channels}", "baseline",
                            (n_samples, n_channels, 1), n_classes, layers)


def adapt_temporal_conv(base_filter_len, base_stride, rate_ratio):
    """Scale the first temporal conv so it spans the same time at a new sample rate.

    ``rate_ratio`` is new_rate / base_rate. Rounds half up.
    """
    if rate_ratio <= 0:
        raise ValueError(f"rate ratio must be positive, got {rate_ratio}")
    length = math.floor(base_filter_len * rate_ratio + 0.5)
    stride = max(1, math.floor(base_stride * rate_ratio + 0.5))
    if length < 1:
        raise ValueError(f"adapted filter length {length} < 1")
    return length, stride


def tts_db1_spec(**kw):
    return build_tts_spec(15, 10, kw.pop("n_classes", 53), name="tts_db1", **kw)


def tts_db2_spec(**kw):
    # first layer chosen by design rather than by adapt_temporal_conv
    return build_tts_spec(300, 12, kw.pop("n_classes", 41), temporal_size=50, temporal_stride=25,
                          name="tts_db2", **kw)


def baseline_db1_spec(**kw):
    return build_baseline_spec(15, 10, kw.pop("n_classes", 53), name="baseline_db1", **kw)


def baseline_db2_spec(**kw):
    size, stride = adapt_temporal_conv(3, 1, 2000 / 100)
    # 41 outputs: the class count of the 2 kHz database
    return build_baseline_spec(300, 12, kw.pop("n_classes", 41), first_size=size, first_stride=stride,
                               name="baseline_db2", **kw)


SPEC_BUILDERS = {
    ("tts", 1): tts_db1_spec,
    ("tts", 2): tts_db2_spec,
    ("baseline", 1): baseline_db1_spec,
    ("baseline", 2): baseline_db2_spec,
}


def build_network(spec: ArchitectureSpec, seed=0, dtype=np.float64, zero_init=False):
    """Instantiate ``spec`` with Glorot-uniform weights and zero biases."""
    rng = None if zero_init else np.random.default_rng(seed)
    alpha = spec.lrelu_slope
    shape = spec.input_shape
    layers = []
    n_conv = n_dense = 0
    for d in spec.layers:
        kind = d["type"]
        if kind == "noise":
            layer = GaussianNoise(d["sigma"])
        elif kind == "conv":
            n_conv += 1
            cs = ConvSpec(d["size"][0], d["size"][1], d["filters"], d["stride"][0], d["stride"][1])
            role = d.get("role")
            layer = Conv2D(shape[2], cs, "lrelu", alpha, role=role, rng=rng, dtype=dtype,
                           name=f"conv{n_conv}" + (f"_{role}" if role else ""))
        elif kind == "fire":
            layer = TemporalFire(shape[2], d["squeeze"], d["expand1"], d["expand3"], alpha,
                                 rng=rng, dtype=dtype, name="temporal_fire")
        elif kind == "flatten":
            layer = Flatten()
        elif kind == "dropout":
            layer = Dropout(d["rate"])
        elif kind == "dense":
            n_dense += 1
            act = "linear" if d["activation"] == "softmax" else d["activation"]
            layer = Dense(int(np.prod(shape)), d["units"], act, alpha, rng=rng, dtype=dtype,
                          name=f"dense{n_dense}")
        else:
            raise ValueError(f"unknown layer type {kind!r}")
        shape = layer.output_shape(shape)
        layers.append(layer)
    return Network(layers, spec.input_shape, spec.n_classes, architecture=spec, seed=seed)


def build_tts_db1(seed=0, dtype=np.float64, **kw):
    return build_network(tts_db1_spec(**kw), seed, dtype)


def build_tts_db2(seed=0, dtype=np.float64, **kw):
    return build_network(tts_db2_spec(**kw), seed, dtype)


def build_baseline_db1(seed=0, dtype=np.float64, **kw):
    return build_network(baseline_db1_spec(**kw), seed, dtype)


def build_baseline_db2(seed=0, dtype=np.float64, **kw):
    return build_network(baseline_db2_spec(**kw), seed, dtype)


def closed_form_parameter_count(spec: ArchitectureSpec):
    """Parameter total computed from the descriptors alone (no layer objects)."""
    rows, cols, depth = spec.input_shape
    total = 0
    flat = None
    for d in spec.layers:
        if d["type"] == "conv":
            R, C = d["size"]
            total += R * C * depth * d["filters"] + d["filters"]
            rows = -(-rows // d["stride"][0])
            cols = -(-cols // d["stride"][1])
            depth = d["filters"]
        elif d["type"] == "fire":
            s, e1, e3 = d["squeeze"], d["expand1"], d["expand3"]
            total += (depth * s + s) + (s * e1 + e1) + (3 * s * e3 + e3)
            depth = e1 + e3
        elif d["type"] == "flatten":
            flat = rows * cols * depth
        elif d["type"] == "dense":
            total += (flat + 1) * d["units"]
            flat = d["units"]
    return total


def count_parameters(network):
    return network.count_parameters()


def temporal_fire_forward(x, fire: TemporalFire):
    """Inference-mode forward of one Temporal Fire block."""
    x = np.asarray(x, dtype=fire.squeeze.weight.value.dtype)
    if x.shape[-1] != fire.in_depth:
        raise ShapeError(f"input depth {x.shape[-1]} != fire input depth {fire.in_depth}", "depth")
    return fire.forward(x, "infer", None, False)
