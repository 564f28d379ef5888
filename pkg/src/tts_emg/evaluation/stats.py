"""Friedman rank test with the Iman-Davenport correction and Holm post-hoc tests."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass
class FriedmanResult:
    chi2: float
    iman_davenport: float | None  # None when the statistic is degenerate
    avg_ranks: np.ndarray
    n_datasets: int
    n_classifiers: int
    chi2_pvalue: float
    f_pvalue: float | None

    @property
    def degenerate(self):
        return self.iman_davenport is None


def rank_rows(perf):
    """Rank each row so the highest value gets rank 1; ties share the mean rank."""
    perf = np.asarray(perf, dtype=np.float64)
    return np.vstack([stats.rankdata(-row, method="average") for row in perf])


def friedman_test(perf):
    """``perf`` is ``N datasets x k classifiers`` (higher is better)."""
    perf = np.asarray(perf, dtype=np.float64)
    if perf.ndim != 2 or perf.shape[0] < 2 or perf.shape[1] < 2:
        raise ValueError(f"need at least 2 datasets and 2 classifiers, got shape {perf.shape}")
    N, k = perf.shape
    R = rank_rows(perf).mean(axis=0)
    chi2 = 12.0 * N / (k * (k + 1)) * float(np.sum((R - (k + 1) / 2.0) ** 2))
    chi2_p = float(stats.chi2.sf(chi2, k - 1))
    denom = N * (k - 1) - chi2
    if math.isclose(denom, 0.0, abs_tol=1e-12 * N * k):
        return FriedmanResult(chi2, None, R, N, k, chi2_p, None)
    f_id = (N - 1) * chi2 / denom
    f_p = float(stats.f.sf(f_id, k - 1, (k - 1) * (N - 1)))
    return FriedmanResult(chi2, f_id, R, N, k, chi2_p, f_p)


@dataclass
class HolmDecision:
    classifier: int
    z: float
    pvalue: float
    threshold: float
    reject: bool


def holm_step_down(pvalues, alpha=0.02):
    """Holm's step-down procedure on ``m`` p-values.

    Returns a reject flag per input position. The i-th smallest p-value
    (0-based) is compared with ``alpha / (m - i)``; the first failure keeps
    that and every later hypothesis.
    """
    p = np.asarray(pvalues, dtype=np.float64)
    m = p.size
    order = np.argsort(p, kind="stable")
    reject = np.zeros(m, dtype=bool)
    for i, j in enumerate(order):
        if p[j] < alpha / (m - i):
            reject[j] = True
        else:
            break
    return reject


def holm_procedure(avg_ranks, n_datasets, n_classifiers, control_index, alpha=0.02):
    """Compare the control classifier with every other one; returns decisions sorted by p-value."""
    R = np.asarray(avg_ranks, dtype=np.float64)
    k = n_classifiers
    if R.shape != (k,):
        raise ValueError(f"{R.size} average ranks for {k} classifiers")
    if not 0 <= control_index < k:
        raise IndexError(f"control index {control_index} out of range for {k} classifiers")
    se = math.sqrt(k * (k + 1) / (6.0 * n_datasets))
    others = [j for j in range(k) if j != control_index]
    z = np.array([(R[control_index] - R[j]) / se for j in others])
    p = 2.0 * stats.norm.sf(np.abs(z))
    reject = holm_step_down(p, alpha)
    order = np.argsort(p, kind="stable")
    m = len(others)
    return [HolmDecision(others[j], float(z[j]), float(p[j]), alpha / (m - i), bool(reject[j]))
            for i, j in enumerate(order)]
