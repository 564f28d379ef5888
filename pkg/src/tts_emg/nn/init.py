import math

import numpy as np


def glorot_limit(fan_in, fan_out):
    if fan_in < 1 or fan_out < 1:
        raise ValueError("fans must be >= 1")
    return math.sqrt(6.0 / (fan_in + fan_out))


def glorot_uniform_init(shape, fan_in, fan_out, rng, dtype=np.float64):
    """Uniform samples on ``[-L, L]`` with ``L = sqrt(6 / (fan_in + fan_out))``."""
    limit = glorot_limit(fan_in, fan_out)
    return rng.uniform(-limit, limit, size=shape).astype(dtype, copy=False)


def conv_fans(filter_rows, filter_cols, d_in, d_out):
    """Fans of a conv kernel: receptive field times input or output depth."""
    field = filter_rows * filter_cols
    return field * d_in, field * d_out
