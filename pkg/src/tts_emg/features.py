"""Per-channel hand-crafted EMG features: marginal DWT, MAV and WL.

The DWT is a periodised (circular) two-channel filterbank. With the level
offset ``c = L / 2`` (``L`` = filter length) one stage computes::

    approx[k] = sum_j lo[j] * x[(2k + c - j) mod N]
    detail[k] = sum_j hi[j] * x[(2k + c - j) mod N]

which is the same phase convention as PyWavelets' ``periodization`` mode.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

# Daubechies symlet-4 decomposition lowpass taps (PyWavelets ``sym4.dec_lo``).
SYM4_DEC_LO = (
    -0.07576571478927333,
    -0.02963552764599851,
    0.49761866763201545,
    0.8037387518059161,
    0.29785779560527736,
    -0.09921954357684722,
    -0.012603967262037833,
    0.0322231006040427,
)


def quadrature_mirror(lowpass):
    """Highpass taps ``hi[k] = (-1)^(k+1) * lo[L-1-k]``."""
    lo = np.asarray(lowpass, dtype=np.float64)
    signs = np.where(np.arange(lo.size) % 2 == 0, -1.0, 1.0)
    return signs * lo[::-1]


@dataclass(frozen=True)
class WaveletSpec:
    name: str = "sym4"
    lowpass: tuple = SYM4_DEC_LO
    highpass: tuple = field(default=None)
    levels: int = 3

    def __post_init__(self):
        if self.highpass is None:
            object.__setattr__(self, "highpass", tuple(quadrature_mirror(self.lowpass)))
        if self.levels < 1:
            raise ValueError("need at least one decomposition level")
        if len(self.lowpass) != len(self.highpass) or len(self.lowpass) % 2:
            raise ValueError("filters must have equal, even length")


SYM4 = WaveletSpec()


def mav(channel):
    x = np.asarray(channel, dtype=np.float64)
    if x.size == 0:
        raise ValueError("MAV of an empty series")
    return float(np.mean(np.abs(x)))


def wl(channel):
    x = np.asarray(channel, dtype=np.float64)
    if x.size < 2:
        raise ValueError("waveform length needs at least 2 samples")
    return float(np.sum(np.abs(np.diff(x))))


def dwt_level(series, wavelet: WaveletSpec = SYM4):
    """One periodised analysis stage along the last axis; returns ``(approx, detail)``.

    Filters longer than the series wrap around it more than once.
    """
    x = np.asarray(series, dtype=np.float64)
    n = x.shape[-1]
    if n < 2 or n % 2:
        raise ValueError(f"series length must be even and >= 2, got {n}")
    lo = np.asarray(wavelet.lowpass)
    hi = np.asarray(wavelet.highpass)
    L = lo.size
    k = np.arange(n // 2)[:, None]
    idx = (2 * k + L // 2 - np.arange(L)[None, :]) % n
    taps = x[..., idx]
    return taps @ lo, taps @ hi


def padded_length(n, levels):
    """Next power of two that is >= n and >= 2**levels."""
    return 1 << max(levels, int(np.ceil(np.log2(max(n, 1)))))


def _mdwt_last_axis(x, wavelet, S):
    n = x.shape[-1]
    if n < 2 ** S:
        raise ValueError(f"series of {n} samples is too short for {S} levels")
    size = padded_length(n, S)
    if size != n:
        pad = [(0, 0)] * (x.ndim - 1) + [(0, size - n)]
        x = np.pad(x, pad)
    out = np.empty(x.shape[:-1] + (S,))
    approx = x
    for s in range(S):
        approx, detail = dwt_level(approx, wavelet)
        out[..., s] = np.abs(detail).sum(axis=-1)
    return out


def mdwt(channel, wavelet: WaveletSpec = SYM4, levels=None):
    """Sum of absolute detail coefficients at each level 1..S.

    Series whose length is not a power of two are zero-padded to the next one.
    """
    S = wavelet.levels if levels is None else levels
    return _mdwt_last_axis(np.asarray(channel, dtype=np.float64), wavelet, S)


def _features(windows, wavelet, S):
    # windows: (..., n_s, n_c) -> (..., n_c * (S + 2))
    x = np.swapaxes(np.asarray(windows, dtype=np.float64), -1, -2)
    if x.shape[-1] < 2:
        raise ValueError("waveform length needs at least 2 samples")
    parts = np.concatenate([
        _mdwt_last_axis(x, wavelet, S),
        np.mean(np.abs(x), axis=-1, keepdims=True),
        np.sum(np.abs(np.diff(x, axis=-1)), axis=-1, keepdims=True),
    ], axis=-1)
    return parts.reshape(parts.shape[:-2] + (-1,))


def extract_features(window, wavelet: WaveletSpec = SYM4, levels=None):
    """Channel-major vector ``[mdwt_1..S, mav, wl]`` per channel of an ``n_s x n_c`` window."""
    S = wavelet.levels if levels is None else levels
    w = np.asarray(window, dtype=np.float64)
    if w.ndim == 3 and w.shape[2] == 1:
        w = w[..., 0]
    if w.ndim != 2:
        raise ValueError(f"expected an n_s x n_c window, got shape {w.shape}")
    return _features(w, wavelet, S)


def extract_feature_matrix(windows, wavelet: WaveletSpec = SYM4, levels=None, batch=4096):
    """Feature rows for every window of a window set or ``(N, n_s, n_c)`` array."""
    S = wavelet.levels if levels is None else levels
    X = windows.X if hasattr(windows, "X") else np.asarray(windows)
    n_feat = X.shape[2] * (S + 2)
    out = np.empty((len(X), n_feat))
    for start in range(0, len(X), batch):
        out[start:start + batch] = _features(X[start:start + batch], wavelet, S)
    return out


def feature_names(n_channels, levels=3):
    names = []
    for c in range(1, n_channels + 1):
        names += [f"ch{c}_mdwt{s}" for s in range(1, levels + 1)]
        names += [f"ch{c}_mav", f"ch{c}_wl"]
    return names


@dataclass(frozen=True)
class Normalizer:
    mean: np.ndarray
    std: np.ndarray
    degenerate: tuple = ()


def fit_normalizer(train_features):
    F = np.asarray(train_features, dtype=np.float64)
    if F.ndim != 2 or F.shape[0] == 0:
        raise ValueError("cannot fit a normaliser on an empty feature set")
    if F.shape[0] < 2:
        raise ValueError("need at least 2 training vectors")
    mean = F.mean(axis=0)
    std = F.std(axis=0)
    zero = std == 0
    return Normalizer(mean, np.where(zero, 1.0, std), tuple(int(i) for i in np.flatnonzero(zero)))


def apply_normalizer(normalizer, features):
    return (np.asarray(features, dtype=np.float64) - normalizer.mean) / normalizer.std


def write_feature_matrix(path, features, n_channels, levels=3, labels=None, repetitions=None):
    """Comma-separated export with a header row; optional label columns go last."""
    header = feature_names(n_channels, levels)
    extra = []
    if labels is not None:
        header.append("movement")
        extra.append(np.asarray(labels))
    if repetitions is not None:
        header.append("repetition")
        extra.append(np.asarray(repetitions))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, row in enumerate(np.asarray(features)):
            writer.writerow([repr(float(v)) for v in row] + [int(e[i]) for e in extra])


def read_feature_matrix(path):
    """Return ``(header, feature_array, label_columns)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    n_feat = sum(1 for h in header if h.startswith("ch"))
    data = np.array(rows[1:], dtype=np.float64).reshape(len(rows) - 1, len(header))
    labels = {h: data[:, i].astype(np.int64) for i, h in enumerate(header) if i >= n_feat}
    return header, data[:, :n_feat], labels
