"""Continuous labelled EMG recordings and their text file format.

File format (UTF-8, tab-separated)::

    #emg-recording v1 rate=<hz> channels=<n> subject=<id> db=<1|2>
    <ch1> ... <chN> <movement> <repetition>
    ...
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import DataFormatError

# movement classes (rest included) per database
DATABASE_CLASSES = {1: 53, 2: 41}

_HEADER = re.compile(r"^#emg-recording v1 rate=(\S+) channels=(\d+) subject=(\S+) db=([12])$")


@dataclass
class Recording:
    emg: np.ndarray
    movement: np.ndarray
    repetition: np.ndarray
    sample_rate_hz: float
    subject_id: str
    database_id: int
    # True where a window may not start (set by enforce_gaps)
    excluded_starts: np.ndarray = field(default=None)

    def __post_init__(self):
        self.emg = np.asarray(self.emg, dtype=np.float64)
        self.movement = np.asarray(self.movement, dtype=np.int64)
        self.repetition = np.asarray(self.repetition, dtype=np.int64)
        n = self.emg.shape[0]
        if self.emg.ndim != 2:
            raise ValueError("emg must be a samples x channels matrix")
        if self.movement.shape != (n,) or self.repetition.shape != (n,):
            raise ValueError("movement and repetition need one entry per sample")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample rate must be positive")
        if self.excluded_starts is None:
            self.excluded_starts = np.zeros(n, dtype=bool)
        else:
            self.excluded_starts = np.asarray(self.excluded_starts, dtype=bool)

    @property
    def n_samples(self):
        return self.emg.shape[0]

    @property
    def n_channels(self):
        return self.emg.shape[1]

    def with_labels(self, repetition=None, excluded_starts=None):
        return replace(
            self,
            repetition=self.repetition.copy() if repetition is None else repetition,
            excluded_starts=self.excluded_starts.copy() if excluded_starts is None else excluded_starts,
        )


def parse_header(line, path=None):
    m = _HEADER.match(line.rstrip("\r\n"))
    if not m:
        raise DataFormatError(f"malformed header {line.strip()!r}", path, 1)
    rate = float(m.group(1))
    if not (math.isfinite(rate) and rate > 0):
        raise DataFormatError(f"invalid sample rate {m.group(1)!r}", path, 1)
    return rate, int(m.group(2)), m.group(3), int(m.group(4))


def _read_one(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataFormatError("empty file", path, 1)
    rate, n_ch, subject, db = parse_header(lines[0], path)
    n_fields = n_ch + 2
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != n_fields:
            what = "missing repetition column" if len(parts) == n_fields - 1 else "ragged row"
            raise DataFormatError(f"{what}: expected {n_fields} fields, got {len(parts)}", path, lineno)
        rows.append((lineno, parts))
    if not rows:
        raise DataFormatError("no samples", path)
    try:
        values = np.array([p for _, p in rows], dtype=np.float64)
    except ValueError:
        for lineno, parts in rows:
            try:
                [float(v) for v in parts]
            except ValueError as exc:
                raise DataFormatError(f"non-numeric value ({exc})", path, lineno) from None
        raise
    n_classes = DATABASE_CLASSES[db]
    for col, name, upper in ((n_ch, "movement", n_classes), (n_ch + 1, "repetition", None)):
        labels = values[:, col]
        bad = (labels != np.round(labels)) | (labels < 0)
        if upper is not None:
            bad |= labels >= upper
        if np.any(bad):
            lineno = rows[int(np.argmax(bad))][0]
            raise DataFormatError(f"invalid {name} value {labels[bad][0]!r}", path, lineno)
    if not np.all(np.isfinite(values[:, :n_ch])):
        lineno = rows[int(np.argmax(~np.isfinite(values[:, :n_ch]).all(axis=1)))][0]
        raise DataFormatError("non-finite EMG value", path, lineno)
    return Recording(values[:, :n_ch], values[:, n_ch].astype(np.int64),
                     values[:, n_ch + 1].astype(np.int64), rate, subject, db)


def load_recording(paths):
    """Read one recording file, or concatenate several exercise files in order."""
    if isinstance(paths, (str, bytes)) or hasattr(paths, "__fspath__"):
        paths = [paths]
    parts = [_read_one(p) for p in paths]
    if not parts:
        raise ValueError("no recording files given")
    first = parts[0]
    for p, rec in zip(paths, parts):
        if (rec.sample_rate_hz, rec.n_channels, rec.subject_id, rec.database_id) != (
                first.sample_rate_hz, first.n_channels, first.subject_id, first.database_id):
            raise DataFormatError("header does not match the first exercise file", p, 1)
    return concatenate(parts)


def concatenate(recordings):
    first = recordings[0]
    return Recording(
        np.concatenate([r.emg for r in recordings]),
        np.concatenate([r.movement for r in recordings]),
        np.concatenate([r.repetition for r in recordings]),
        first.sample_rate_hz, first.subject_id, first.database_id,
    )


def format_header(rec):
    rate = rec.sample_rate_hz
    rate_s = str(int(rate)) if float(rate).is_integer() else repr(float(rate))
    return f"#emg-recording v1 rate={rate_s} channels={rec.n_channels} subject={rec.subject_id} db={rec.database_id}"


def write_recording(path, rec: Recording):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_header(rec) + "\n")
        for row, mv, rp in zip(rec.emg, rec.movement, rec.repetition):
            fh.write("\t".join(repr(float(v)) for v in row) + f"\t{int(mv)}\t{int(rp)}\n")
