"""Training-set statistics: per-channel signal normalisation and class weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SignalNormalizer:
    mean: np.ndarray
    std: np.ndarray
    degenerate: tuple = ()  # channels whose std was replaced by 1


def _coverage(windows):
    """Number of windows covering each raw sample."""
    n = windows.signal.shape[0]
    diff = np.zeros(n + 1, dtype=np.int64)
    np.add.at(diff, windows.starts, 1)
    np.add.at(diff, windows.starts + windows.window_samples, -1)
    return np.cumsum(diff[:-1])


def fit_signal_normalizer(train_windows):
    """Per-channel mean and population std over every sample of every training window.

    Overlapping windows count a sample once per window, exactly as if the
    windows were stacked. Only samples inside training windows are read.
    """
    if len(train_windows) == 0:
        raise ValueError("cannot fit a normaliser on an empty window set")
    cov = _coverage(train_windows)
    used = np.flatnonzero(cov)
    w = cov[used].astype(np.float64)
    x = train_windows.signal[used].astype(np.float64)
    total = w.sum()
    mean = (w[:, None] * x).sum(axis=0) / total
    var = (w[:, None] * (x - mean) ** 2).sum(axis=0) / total
    std = np.sqrt(var)
    bad = tuple(int(c) for c in np.flatnonzero(std == 0))
    std = np.where(std == 0, 1.0, std)
    return SignalNormalizer(mean, std, bad)


def apply_signal_normalizer(normalizer, windows):
    return windows.with_signal((windows.signal - normalizer.mean) / normalizer.std)


def class_weights(train_labels, n_classes):
    """``gamma_j = 1 + log2(n_max / n_j)`` from training label counts."""
    labels = np.asarray(train_labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(f"labels must lie in [0, {n_classes})")
    counts = np.bincount(labels, minlength=n_classes)
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        raise ValueError(f"classes absent from the training set: {missing.tolist()}")
    return 1.0 + np.log2(counts.max() / counts)
