"""Pure numpy fallback for the compiled convolution kernels.

Both functions take the same arguments as their compiled counterparts and
return identical arrays; the column layout is ``(row, col, depth)`` with depth
fastest, matching ``weights.reshape(R * C * D, F)``.
"""

import numpy as np


def _padded(shape, R, C, sr, sc, pad_top, pad_left, out_r, out_c):
    B, H, W, D = shape
    ph = max((out_r - 1) * sr + R, H + pad_top)
    pw = max((out_c - 1) * sc + C, W + pad_left)
    return B, ph, pw, D


def im2col(x, R, C, sr, sc, pad_top, pad_left, out_r, out_c):
    B, H, W, D = x.shape
    padded = np.zeros(_padded(x.shape, R, C, sr, sc, pad_top, pad_left, out_r, out_c), dtype=x.dtype)
    padded[:, pad_top:pad_top + H, pad_left:pad_left + W, :] = x
    cols = np.empty((B, out_r, out_c, R, C, D), dtype=x.dtype)
    for i in range(R):
        for j in range(C):
            cols[:, :, :, i, j, :] = padded[:, i:i + sr * out_r:sr, j:j + sc * out_c:sc, :]
    return cols.reshape(B * out_r * out_c, R * C * D)


def col2im(cols, shape, R, C, sr, sc, pad_top, pad_left, out_r, out_c):
    B, H, W, D = shape
    grad = np.zeros(_padded(shape, R, C, sr, sc, pad_top, pad_left, out_r, out_c), dtype=cols.dtype)
    blocks = cols.reshape(B, out_r, out_c, R, C, D)
    for i in range(R):
        for j in range(C):
            grad[:, i:i + sr * out_r:sr, j:j + sc * out_c:sc, :] += blocks[:, :, :, i, j, :]
    return np.ascontiguousarray(grad[:, pad_top:pad_top + H, pad_left:pad_left + W, :])
