from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SplitSpec:
    train_reps: frozenset
    test_reps: frozenset

    def __init__(self, train_reps, test_reps):
        object.__setattr__(self, "train_reps", frozenset(int(r) for r in train_reps))
        object.__setattr__(self, "test_reps", frozenset(int(r) for r in test_reps))
        if self.train_reps & self.test_reps:
            raise ValueError(f"train and test repetitions overlap: {sorted(self.train_reps & self.test_reps)}")
        if 0 in self.train_reps or 0 in self.test_reps:
            raise ValueError("repetition 0 (unassigned) cannot be part of a split")


_DB1 = [
    ([1, 3, 4, 6, 8, 9, 10], [2, 5, 7]),
    ([1, 2, 3, 5, 7, 9, 10], [4, 6, 8]),
    ([1, 2, 4, 6, 7, 8, 10], [3, 5, 9]),
    ([1, 2, 5, 6, 8, 9, 10], [3, 4, 7]),
    ([2, 3, 4, 6, 8, 9, 10], [1, 5, 7]),
    ([1, 2, 3, 4, 5, 7, 9], [6, 8, 10]),
    ([3, 5, 6, 7, 8, 9, 10], [1, 2, 4]),
    ([1, 2, 4, 5, 7, 8, 9], [3, 6, 10]),
    ([3, 4, 5, 6, 7, 8, 10], [1, 2, 9]),
    ([1, 2, 3, 4, 5, 6, 7], [8, 9, 10]),
]

_DB2 = [
    ([1, 3, 4, 6], [2, 5]),
    ([1, 4, 5, 6], [2, 3]),
    ([1, 2, 3, 5], [4, 6]),
    ([1, 2, 4, 6], [3, 5]),
    ([2, 3, 4, 5], [1, 6]),
    ([2, 3, 5, 6], [1, 4]),
]


def standard_splits(database_id):
    """The repetition splits used for multi-split cross-validation (1-based order)."""
    table = {1: _DB1, 2: _DB2}.get(database_id)
    if table is None:
        raise ValueError(f"unknown database {database_id!r}; expected 1 or 2")
    return [SplitSpec(tr, te) for tr, te in table]


def split_windows(windows, split: SplitSpec):
    """Partition windows into ``(train, test)`` by repetition; others are dropped."""
    if split.train_reps & split.test_reps:
        raise ValueError("train and test repetitions overlap")
    rep = windows.repetition
    train = np.isin(rep, sorted(split.train_reps))
    test = np.isin(rep, sorted(split.test_reps))
    return windows.subset(np.flatnonzero(train)), windows.subset(np.flatnonzero(test))
