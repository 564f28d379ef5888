"""Repetition relabelling of rest periods and inter-repetition gaps."""

import math

import numpy as np


def _runs(mask):
    """``(start, stop)`` pairs of maximal True runs."""
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return list(zip(edges[0::2], edges[1::2]))


def relabel_rest(recording, max_rest_seconds=10.0):
    """Give rest samples the repetition of the neighbouring movements.

    Each unassigned rest block is split in half: the first half (the extra
    sample of an odd block included) joins the preceding movement's repetition
    and the second half the following one's, each capped at
    ``max_rest_seconds``. Samples beyond the caps stay at repetition 0.
    Movement labels are untouched.
    """
    cap = int(math.floor(max_rest_seconds * recording.sample_rate_hz + 1e-9))
    mv, rep = recording.movement, recording.repetition
    new_rep = rep.copy()
    n = len(mv)
    for start, stop in _runs((mv == 0) & (rep == 0)):
        length = stop - start
        prev = rep[start - 1] if start > 0 and mv[start - 1] != 0 else None
        nxt = rep[stop] if stop < n and mv[stop] != 0 else None
        first = (length + 1) // 2
        second = length - first
        if prev is not None:
            new_rep[start:start + min(first, cap)] = prev
        if nxt is not None:
            take = min(second, cap)
            new_rep[stop - take:stop] = nxt
    return recording.with_labels(repetition=new_rep)


def repetition_boundaries(repetition):
    """Indices ``b`` where ``repetition[b] != repetition[b - 1]``."""
    return np.flatnonzero(np.diff(repetition)) + 1


def enforce_gaps(recording, window_samples):
    """Forbid window starts that would straddle a repetition change.

    For every boundary ``b`` the starts ``b - window_samples + 1 .. b - 1`` are
    excluded, so every emitted window lies inside a single repetition.
    """
    excluded = recording.excluded_starts.copy()
    for b in repetition_boundaries(recording.repetition):
        excluded[max(0, b - window_samples + 1):b] = True
    return recording.with_labels(excluded_starts=excluded)
