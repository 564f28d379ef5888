"""Stateless forward/backward primitives on channels-last numpy arrays.

Feature volumes are ``(batch, rows, cols, depth)``; a single volume
``(rows, cols, depth)`` is accepted wherever a batch is and returned unbatched.
Rows are the temporal axis and columns the EMG channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError
from . import kernels

# Upper bound on im2col buffer size (elements) before splitting the batch.
_MAX_COL_ELEMENTS = 1 << 23
_LOG_CLAMP = 1e-12


@dataclass(frozen=True)
class ConvSpec:
    filter_rows: int
    filter_cols: int
    num_filters: int
    stride_rows: int = 1
    stride_cols: int = 1

    def __post_init__(self):
        for name in ("filter_rows", "filter_cols", "num_filters", "stride_rows", "stride_cols"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")

    def output_shape(self, rows, cols):
        return math.ceil(rows / self.stride_rows), math.ceil(cols / self.stride_cols)

    def padding(self, rows, cols):
        """Return ``(pad_top, pad_left)`` for zero "same" padding."""
        out_r, out_c = self.output_shape(rows, cols)
        total_r = max((out_r - 1) * self.stride_rows + self.filter_rows - rows, 0)
        total_c = max((out_c - 1) * self.stride_cols + self.filter_cols - cols, 0)
        return total_r // 2, total_c // 2


def _as_batch(x):
    if x.ndim == 3:
        return x[None], True
    if x.ndim == 4:
        return x, False
    raise ShapeError(f"expected a (rows, cols, depth) volume or a batch of them, got shape {x.shape}", "ndim")


def _check_conv(x, weights, bias, spec):
    R, C, d_in, d_out = weights.shape
    if (R, C, d_out) != (spec.filter_rows, spec.filter_cols, spec.num_filters):
        raise ShapeError(f"weights shape {weights.shape} does not match {spec}", "filter")
    if x.shape[-1] != d_in:
        raise ShapeError(f"input depth {x.shape[-1]} != filter input depth {d_in}", "depth")
    if bias is not None and bias.shape != (d_out,):
        raise ShapeError(f"bias shape {bias.shape} != ({d_out},)", "bias")


def _chunks(batch, rows_per_sample, width):
    step = max(1, _MAX_COL_ELEMENTS // max(1, rows_per_sample * width))
    for start in range(0, batch, step):
        yield slice(start, min(start + step, batch))


def _pointwise(spec):
    return spec.filter_rows == spec.filter_cols == spec.stride_rows == spec.stride_cols == 1


def _columns(x, spec, pt, pl, out_r, out_c):
    if _pointwise(spec):
        return x.reshape(-1, x.shape[-1])
    return kernels.im2col(x, spec.filter_rows, spec.filter_cols, spec.stride_rows, spec.stride_cols,
                          pt, pl, out_r, out_c)


def conv2d_forward(x, weights, bias, spec: ConvSpec):
    """Same-padded, strided cross-correlation plus bias (no activation).

    ``weights`` has shape ``(R, C, d_in, d_out)``. Output spatial size is
    ``ceil(input / stride)`` on each axis.
    """
    xb, single = _as_batch(np.asarray(x))
    _check_conv(xb, weights, bias, spec)
    B, H, W, D = xb.shape
    R, C, _, F = weights.shape
    out_r, out_c = spec.output_shape(H, W)
    pt, pl = spec.padding(H, W)
    wmat = weights.reshape(R * C * D, F)
    out = np.empty((B, out_r * out_c, F), dtype=np.result_type(xb, weights))
    for sl in _chunks(B, out_r * out_c, R * C * D):
        cols = _columns(xb[sl], spec, pt, pl, out_r, out_c)
        out[sl] = (cols @ wmat).reshape(-1, out_r * out_c, F)
    if bias is not None:
        out += bias
    out = out.reshape(B, out_r, out_c, F)
    return out[0] if single else out


def conv2d_backward(upstream, cached_input, weights, spec: ConvSpec, input_grad=True):
    """Adjoint of :func:`conv2d_forward`.

    Returns ``(input_grad, weight_grad, bias_grad)``; the first entry is
    ``None`` when ``input_grad`` is false.
    """
    xb, single = _as_batch(np.asarray(cached_input))
    gb = upstream[None] if single else upstream
    _check_conv(xb, weights, None, spec)
    B, H, W, D = xb.shape
    R, C, _, F = weights.shape
    out_r, out_c = spec.output_shape(H, W)
    if gb.shape != (B, out_r, out_c, F):
        raise ShapeError(f"upstream gradient shape {gb.shape} != forward output {(B, out_r, out_c, F)}", "upstream")
    pt, pl = spec.padding(H, W)
    wmat = weights.reshape(R * C * D, F)
    dtype = np.result_type(xb, weights, gb)
    dw = np.zeros((R * C * D, F), dtype=dtype)
    dx = np.empty(xb.shape, dtype=dtype) if input_grad else None
    for sl in _chunks(B, out_r * out_c, R * C * D):
        g = gb[sl].reshape(-1, F)
        cols = _columns(xb[sl], spec, pt, pl, out_r, out_c)
        dw += cols.T @ g
        if not input_grad:
            continue
        dcols = np.ascontiguousarray(g @ wmat.T, dtype=dtype)
        if _pointwise(spec):
            dx[sl] = dcols.reshape(dx[sl].shape)
        else:
            dx[sl] = kernels.col2im(dcols, (sl.stop - sl.start, H, W, D), R, C,
                                    spec.stride_rows, spec.stride_cols, pt, pl, out_r, out_c)
    db = gb.reshape(-1, F).sum(axis=0)
    if dx is not None and single:
        dx = dx[0]
    return dx, dw.reshape(weights.shape), db


def _check_slope(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"LReLU slope must lie in (0, 1), got {alpha}")


def lrelu(x, alpha=0.3):
    _check_slope(alpha)
    return np.where(x >= 0, x, alpha * x)


def lrelu_backward(upstream, x, alpha=0.3):
    # slope 1 at exactly zero (x >= 0 branch)
    _check_slope(alpha)
    return np.where(x >= 0, upstream, alpha * upstream)


def dense_forward(x, weights, bias):
    """Affine map on flattened inputs; ``weights`` is ``(n_in, n_out)``."""
    x = np.asarray(x)
    flat = x.reshape(x.shape[0], -1) if x.ndim > 1 else x
    if flat.shape[-1] != weights.shape[0]:
        raise ShapeError(f"flattened input length {flat.shape[-1]} != weight rows {weights.shape[0]}", "inputs")
    return flat @ weights + bias


def dense_backward(upstream, x, weights):
    x = np.asarray(x)
    flat = x.reshape(x.shape[0], -1) if x.ndim > 1 else x
    if upstream.shape[-1] != weights.shape[1]:
        raise ShapeError(f"upstream width {upstream.shape[-1]} != outputs {weights.shape[1]}", "outputs")
    if flat.ndim == 1:
        dw = np.outer(flat, upstream)
        db = upstream.copy()
    else:
        dw = flat.T @ upstream
        db = upstream.sum(axis=0)
    dx = (upstream @ weights.T).reshape(x.shape)
    return dx, dw, db


def softmax(logits):
    logits = np.asarray(logits)
    if not np.all(np.isfinite(logits)):
        raise FloatingPointError("softmax received non-finite logits")
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class ClampCounter:
    """Counts how often ``log(0)`` had to be clamped in the loss."""

    def __init__(self):
        self.count = 0


def cross_entropy_loss(probs, labels, class_weight=1.0, counter: ClampCounter | None = None):
    """Weighted negative log-likelihood per sample.

    ``probs`` is ``(M,)`` or ``(batch, M)``; ``labels`` a class index or an
    integer array; ``class_weight`` a scalar or one weight per sample.
    Returns a scalar for one sample, else a per-sample vector.
    """
    probs = np.asarray(probs)
    single = probs.ndim == 1
    p2 = probs[None] if single else probs
    lab = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    M = p2.shape[-1]
    if lab.shape[0] != p2.shape[0]:
        raise ShapeError(f"{lab.shape[0]} labels for {p2.shape[0]} samples", "batch")
    if np.any((lab < 0) | (lab >= M)):
        raise ValueError(f"labels must lie in [0, {M})")
    picked = p2[np.arange(p2.shape[0]), lab]
    small = picked < _LOG_CLAMP
    if np.any(small) and counter is not None:
        counter.count += int(small.sum())
    loss = -np.log(np.maximum(picked, _LOG_CLAMP)) * class_weight
    return float(loss[0]) if single else loss


def softmax_cross_entropy_backward(probs, labels, class_weight=1.0):
    """Gradient of ``weight * CE(softmax(z))`` with respect to logits ``z``."""
    probs = np.asarray(probs)
    single = probs.ndim == 1
    p2 = probs[None] if single else probs
    lab = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    grad = p2.copy()
    grad[np.arange(p2.shape[0]), lab] -= 1.0
    w = np.asarray(class_weight, dtype=p2.dtype)
    grad *= w[:, None] if w.ndim == 1 else w
    return grad[0] if single else grad


def _check_mode(mode):
    if mode not in ("train", "infer"):
        raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")


def dropout(x, rate, mode, rng):
    """Inverted dropout; returns ``(output, mask)`` where mask is None at inference."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
    _check_mode(mode)
    if mode == "infer" or rate == 0.0:
        return x, None
    keep = rng.random(x.shape) >= rate
    mask = keep.astype(x.dtype) / x.dtype.type(1.0 - rate)
    return x * mask, mask


def dropout_backward(upstream, mask):
    return upstream if mask is None else upstream * mask


def gaussian_noise(x, sigma, mode, rng):
    """Additive zero-mean Gaussian noise of std ``sigma`` during training."""
    if sigma < 0:
        raise ValueError(f"noise std must be >= 0, got {sigma}")
    _check_mode(mode)
    if mode == "infer" or sigma == 0.0:
        return x
    return x + rng.normal(0.0, sigma, size=x.shape).astype(x.dtype, copy=False)
