"""Confusion matrices, micro/macro accuracy, cross-fold pooling and voting."""

from __future__ import annotations

import warnings

import numpy as np


class ZeroSupportWarning(UserWarning):
    """A class with no test samples was left out of a macro average."""


def confusion(predictions, labels, n_classes):
    """``cm[i, j]`` counts windows of true class ``i`` predicted as ``j``."""
    pred = np.asarray(predictions, dtype=np.int64).ravel()
    true = np.asarray(labels, dtype=np.int64).ravel()
    if pred.shape != true.shape:
        raise ValueError(f"{pred.size} predictions for {true.size} labels")
    if pred.size and (min(pred.min(), true.min()) < 0 or max(pred.max(), true.max()) >= n_classes):
        raise ValueError(f"class indices must lie in [0, {n_classes})")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (true, pred), 1)
    return cm


def _tp_support(cm):
    cm = np.asarray(cm)
    return np.diag(cm), cm.sum(axis=1)


def micro_accuracy(cm):
    tp, support = _tp_support(cm)
    total = support.sum()
    if total == 0:
        raise ValueError("micro accuracy of an empty confusion matrix")
    return float(tp.sum() / total)


def macro_accuracy(cm, warn=True):
    """Mean per-class recall over classes that have test support."""
    tp, support = _tp_support(cm)
    present = support > 0
    if not present.any():
        raise ValueError("macro accuracy of an empty confusion matrix")
    if warn and not present.all():
        warnings.warn(f"classes {np.flatnonzero(~present).tolist()} have no support; excluded",
                      ZeroSupportWarning, stacklevel=2)
    return float(np.mean(tp[present] / support[present]))


def _pooled(fold_cms):
    cms = list(fold_cms)
    if not cms:
        raise ValueError("no folds to aggregate")
    return np.sum([np.asarray(c) for c in cms], axis=0)


def forman_micro(fold_cms):
    """Micro accuracy from TP and FN counts summed over folds."""
    return micro_accuracy(_pooled(fold_cms))


def forman_macro(fold_cms, warn=True):
    """Macro accuracy from per-class TP and FN counts summed over folds."""
    return macro_accuracy(_pooled(fold_cms), warn)


def majority_vote(window_predictions):
    """Modal class of one trial's windows; ties go to the lowest class index."""
    preds = np.asarray(window_predictions, dtype=np.int64)
    if preds.size == 0:
        raise ValueError("majority vote over no windows")
    return int(np.argmax(np.bincount(preds)))


def trials(labels, repetitions, starts=None):
    """Group window indices into trials: maximal runs with equal (class, repetition).

    Windows are taken in order of ``starts`` when given.
    """
    labels = np.asarray(labels)
    repetitions = np.asarray(repetitions)
    order = np.argsort(starts, kind="stable") if starts is not None else np.arange(len(labels))
    groups, current, key = [], [], None
    for i in order:
        k = (labels[i], repetitions[i])
        if k != key and current:
            groups.append(np.array(current))
            current = []
        key = k
        current.append(i)
    if current:
        groups.append(np.array(current))
    return groups


def trial_confusion(predictions, labels, repetitions, n_classes, starts=None):
    """Confusion matrix of majority-voted trial decisions."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    voted, truth = [], []
    for g in trials(labels, repetitions, starts):
        voted.append(majority_vote(predictions[g]))
        truth.append(labels[g[0]])
    return confusion(voted, truth, n_classes)


def per_repetition_confusions(predictions, labels, repetitions, n_classes):
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    repetitions = np.asarray(repetitions)
    return {int(r): confusion(predictions[repetitions == r], labels[repetitions == r], n_classes)
            for r in np.unique(repetitions)}


def per_repetition_accuracy(windows, predictions, n_classes=None):
    """Macro accuracy of the windows of each repetition, keyed by repetition."""
    if n_classes is None:
        n_classes = int(max(np.max(windows.y), np.max(predictions))) + 1
    cms = per_repetition_confusions(predictions, windows.y, windows.repetition, n_classes)
    return {r: macro_accuracy(cm, warn=False) for r, cm in cms.items()}
