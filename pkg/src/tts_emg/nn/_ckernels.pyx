# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled gather/scatter kernels for channels-last "same" convolution."""

import numpy as np
cimport numpy as cnp

ctypedef fused real:
    float
    double


def _im2col(real[:, :, :, ::1] x, real[:, ::1] cols,
            Py_ssize_t R, Py_ssize_t C, Py_ssize_t sr, Py_ssize_t sc,
            Py_ssize_t pad_top, Py_ssize_t pad_left,
            Py_ssize_t out_r, Py_ssize_t out_c):
    cdef Py_ssize_t B = x.shape[0], H = x.shape[1], W = x.shape[2], D = x.shape[3]
    cdef Py_ssize_t b, orow, ocol, i, j, d, row, col, r_in, c_in, base
    with nogil:
        row = 0
        for b in range(B):
            for orow in range(out_r):
                for ocol in range(out_c):
                    col = 0
                    for i in range(R):
                        r_in = orow * sr + i - pad_top
                        for j in range(C):
                            c_in = ocol * sc + j - pad_left
                            if r_in < 0 or r_in >= H or c_in < 0 or c_in >= W:
                                for d in range(D):
                                    cols[row, col + d] = 0
                            else:
                                for d in range(D):
                                    cols[row, col + d] = x[b, r_in, c_in, d]
                            col = col + D
                    row = row + 1


def _col2im(real[:, ::1] cols, real[:, :, :, ::1] dx,
            Py_ssize_t R, Py_ssize_t C, Py_ssize_t sr, Py_ssize_t sc,
            Py_ssize_t pad_top, Py_ssize_t pad_left,
            Py_ssize_t out_r, Py_ssize_t out_c):
    cdef Py_ssize_t B = dx.shape[0], H = dx.shape[1], W = dx.shape[2], D = dx.shape[3]
    cdef Py_ssize_t b, orow, ocol, i, j, d, row, col, r_in, c_in
    # tap-major order: each input element sums its contributions in (i, j)
    # order, matching the numpy fallback bit for bit
    with nogil:
        for b in range(B):
            for i in range(R):
                for j in range(C):
                    col = (i * C + j) * D
                    for orow in range(out_r):
                        r_in = orow * sr + i - pad_top
                        if r_in < 0 or r_in >= H:
                            continue
                        row = (b * out_r + orow) * out_c
                        for ocol in range(out_c):
                            c_in = ocol * sc + j - pad_left
                            if 0 <= c_in < W:
                                for d in range(D):
                                    dx[b, r_in, c_in, d] += cols[row + ocol, col + d]


def im2col(x, Py_ssize_t R, Py_ssize_t C, Py_ssize_t sr, Py_ssize_t sc,
           Py_ssize_t pad_top, Py_ssize_t pad_left,
           Py_ssize_t out_r, Py_ssize_t out_c):
    x = np.ascontiguousarray(x)
    B, _, _, D = x.shape
    cols = np.empty((B * out_r * out_c, R * C * D), dtype=x.dtype)
    _im2col(x, cols, R, C, sr, sc, pad_top, pad_left, out_r, out_c)
    return cols


def col2im(cols, shape, Py_ssize_t R, Py_ssize_t C, Py_ssize_t sr, Py_ssize_t sc,
           Py_ssize_t pad_top, Py_ssize_t pad_left,
           Py_ssize_t out_r, Py_ssize_t out_c):
    cols = np.ascontiguousarray(cols)
    dx = np.zeros(shape, dtype=cols.dtype)
    _col2im(cols, dx, R, C, sr, sc, pad_top, pad_left, out_r, out_c)
    return dx
