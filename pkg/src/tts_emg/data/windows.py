"""Sliding-window segmentation and the binary window-set cache."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import DataFormatError
from ..nn import dump_tensor, load_tensor


@dataclass(frozen=True)
class WindowingConfig:
    window_ms: float = 150.0
    increment_ms: float = 10.0

    def samples(self, sample_rate_hz):
        """``(window, increment)`` in samples at ``sample_rate_hz``."""
        w = int(round(self.window_ms * sample_rate_hz / 1000.0))
        s = int(round(self.increment_ms * sample_rate_hz / 1000.0))
        if w < 1 or s < 1:
            raise ValueError(f"window {w} / increment {s} samples at {sample_rate_hz} Hz")
        return w, s


@dataclass(frozen=True)
class Window:
    X: np.ndarray
    y: int
    repetition: int
    start_sample: int


class WindowArray:
    """Lazy ``(n_windows, n_s, n_c)`` view; indexing materialises copies."""

    def __init__(self, signal, starts, length):
        self._view = np.lib.stride_tricks.sliding_window_view(signal, length, axis=0).transpose(0, 2, 1)
        self._starts = starts
        self.shape = (len(starts), length, signal.shape[1])
        self.dtype = signal.dtype

    def __len__(self):
        return self.shape[0]

    def __getitem__(self, idx):
        if isinstance(idx, tuple):
            return np.asarray(self)[idx]
        return np.array(self._view[self._starts[idx]])

    def __array__(self, dtype=None, copy=None):
        out = self._view[self._starts]
        return out.astype(dtype) if dtype is not None else np.array(out)


class WindowSet:
    """Windows cut from one subject's signal, stored as start offsets."""

    def __init__(self, signal, starts, y, repetition, window_samples, subject_id="",
                 sample_rate_hz=0.0, database_id=0):
        self.signal = np.asarray(signal)
        self.starts = np.asarray(starts, dtype=np.int64)
        self.y = np.asarray(y, dtype=np.int64)
        self.repetition = np.asarray(repetition, dtype=np.int64)
        self.window_samples = int(window_samples)
        self.subject_id = subject_id
        self.sample_rate_hz = sample_rate_hz
        self.database_id = database_id

    @property
    def X(self):
        return WindowArray(self.signal, self.starts, self.window_samples)

    @property
    def n_channels(self):
        return self.signal.shape[1]

    def __len__(self):
        return len(self.starts)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            s = int(self.starts[idx])
            return Window(self.signal[s:s + self.window_samples].copy(), int(self.y[idx]),
                          int(self.repetition[idx]), s)
        return self.subset(idx)

    def subset(self, idx):
        return WindowSet(self.signal, self.starts[idx], self.y[idx], self.repetition[idx],
                         self.window_samples, self.subject_id, self.sample_rate_hz, self.database_id)

    def with_signal(self, signal):
        return WindowSet(signal, self.starts, self.y, self.repetition, self.window_samples,
                         self.subject_id, self.sample_rate_hz, self.database_id)

    def sample_ranges(self):
        """``(start, stop)`` raw-sample interval of every window."""
        return np.stack([self.starts, self.starts + self.window_samples], axis=1)

    def summary(self):
        classes, class_counts = np.unique(self.y, return_counts=True)
        reps, rep_counts = np.unique(self.repetition, return_counts=True)
        return {
            "subject": self.subject_id,
            "windows": int(len(self)),
            "window_samples": self.window_samples,
            "channels": int(self.n_channels),
            "classes": {str(int(c)): int(n) for c, n in zip(classes, class_counts)},
            "repetitions": {str(int(r)): int(n) for r, n in zip(reps, rep_counts)},
        }


def segment(recording, config: WindowingConfig = WindowingConfig()):
    """Slide a window over the whole stream, starting at sample 0.

    Labels come from each window's last sample; windows whose repetition is 0
    or whose start was excluded by :func:`enforce_gaps` are dropped.
    """
    w, inc = config.samples(recording.sample_rate_hz)
    n = recording.n_samples
    if n < w:
        raise ValueError(f"stream of {n} samples is shorter than one {w}-sample window")
    starts = np.arange(0, n - w + 1, inc, dtype=np.int64)
    last = starts + w - 1
    keep = (~recording.excluded_starts[starts]) & (recording.repetition[last] != 0)
    starts, last = starts[keep], last[keep]
    return WindowSet(recording.emg, starts, recording.movement[last], recording.repetition[last], w,
                     recording.subject_id, recording.sample_rate_hz, recording.database_id)


CACHE_MAGIC = b"TTSWIN"
CACHE_VERSION = 1


def window_cache_bytes(ws: WindowSet):
    """Serialise a window set.

    Layout: ``b"TTSWIN"``, version byte, little-endian uint32 header length,
    JSON header, the signal as a tensor dump, then starts, labels and
    repetitions as little-endian int64 arrays of ``header["windows"]`` entries.
    """
    header = {
        "subject": ws.subject_id,
        "sample_rate_hz": ws.sample_rate_hz,
        "database_id": ws.database_id,
        "window_samples": ws.window_samples,
        "windows": int(len(ws)),
    }
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [CACHE_MAGIC, struct.pack("<BI", CACHE_VERSION, len(raw)), raw,
             dump_tensor(np.asarray(ws.signal, dtype=np.float64))]
    for arr in (ws.starts, ws.y, ws.repetition):
        parts.append(np.asarray(arr, dtype="<i8").tobytes())
    return b"".join(parts)


def save_window_cache(path, ws):
    with open(path, "wb") as fh:
        fh.write(window_cache_bytes(ws))


def load_window_cache(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:len(CACHE_MAGIC)] != CACHE_MAGIC:
        raise DataFormatError("not a window cache", path)
    version, hlen = struct.unpack_from("<BI", buf, len(CACHE_MAGIC))
    if version != CACHE_VERSION:
        raise DataFormatError(f"unsupported window cache version {version}", path)
    pos = len(CACHE_MAGIC) + 5
    header = json.loads(buf[pos:pos + hlen].decode("utf-8"))
    pos += hlen
    signal, pos = load_tensor(buf, pos)
    n = header["windows"]
    arrays = []
    for _ in range(3):
        arrays.append(np.frombuffer(buf, dtype="<i8", count=n, offset=pos).astype(np.int64))
        pos += 8 * n
    return WindowSet(signal, *arrays, header["window_samples"], header["subject"],
                     header["sample_rate_hz"], header["database_id"])
