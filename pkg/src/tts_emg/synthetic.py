"""Deterministic synthetic EMG recordings for smoke tests and demos.

Each movement class drives the channels with its own amplitude pattern and
frequency band; rest is low-amplitude broadband noise. Recordings follow the
usual protocol layout: every movement is repeated ``repetitions`` times, each
repetition preceded by a rest period.
"""

from __future__ import annotations

import os

import numpy as np
from scipy import signal

from .data.recording import Recording, write_recording


def _band_noise(rng, n, band, rate):
    nyq = rate / 2.0
    lo, hi = band[0] / nyq, min(band[1] / nyq, 0.99)
    sos = signal.butter(4, [lo, hi], btype="band", output="sos")
    x = signal.sosfilt(sos, rng.standard_normal(n + 200))[200:]
    return x / (x.std() + 1e-12)


def synthetic_recording(subject=1, n_classes=5, n_channels=4, sample_rate_hz=100.0,
                        repetitions=10, movement_s=1.5, rest_s=1.0, seed=0, database_id=1):
    """Build one subject's recording; class 0 is rest."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, subject]))
    n_moves = n_classes - 1
    nyq = sample_rate_hz / 2.0
    edges = np.linspace(0.08 * nyq, 0.9 * nyq, n_moves + 1)
    amp = np.full((n_classes, n_channels), 0.25)
    for c in range(1, n_classes):
        amp[c, (c - 1) % n_channels] += 1.0
        amp[c, c % n_channels] += 0.5
    amp[1:] *= rng.uniform(0.85, 1.15, size=(n_moves, n_channels))
    amp[0] = 0.1

    move_n = int(round(movement_s * sample_rate_hz))
    rest_n = int(round(rest_s * sample_rate_hz))
    emg, movement, repetition = [], [], []

    def rest_block(n):
        block = np.stack([_band_noise(rng, n, (edges[0], edges[-1]), sample_rate_hz)
                          for _ in range(n_channels)], axis=1)
        emg.append(0.1 * block + 0.02 * rng.standard_normal(block.shape))
        movement.append(np.zeros(n, dtype=np.int64))
        repetition.append(np.zeros(n, dtype=np.int64))

    for c in range(1, n_classes):
        band = (edges[c - 1], edges[c])
        for r in range(1, repetitions + 1):
            rest_block(rest_n)
            gain = rng.uniform(0.85, 1.15)
            block = np.stack([_band_noise(rng, move_n, band, sample_rate_hz) for _ in range(n_channels)],
                             axis=1)
            emg.append(gain * amp[c] * block + 0.02 * rng.standard_normal(block.shape))
            movement.append(np.full(move_n, c, dtype=np.int64))
            repetition.append(np.full(move_n, r, dtype=np.int64))
    rest_block(rest_n)
    return Recording(np.concatenate(emg), np.concatenate(movement), np.concatenate(repetition),
                     sample_rate_hz, str(subject), database_id)


def write_synthetic_dataset(directory, n_subjects=3, seed=0, **kwargs):
    """Write ``subject_<k>.emg`` files and return their paths."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for s in range(1, n_subjects + 1):
        path = os.path.join(directory, f"subject_{s}.emg")
        write_recording(path, synthetic_recording(subject=s, seed=seed, **kwargs))
        paths.append(path)
    return paths
