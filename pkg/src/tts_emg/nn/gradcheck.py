"""Finite-difference verification of network gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import functional as F


@dataclass
class GradCheckResult:
    max_rel_error: float
    checked: int
    skipped_kinks: int
    worst_param: str = ""


def _loss(network, x, label, weight):
    logits = network.forward(x, mode="infer", cache=True)
    return F.cross_entropy_loss(F.softmax(logits), label, weight)


def compare_gradients(network, x, label, eps=1e-4, precision="high", class_weight=1.0,
                      abs_floor=1e-6):
    """Analytic versus central-difference gradients for every parameter entry.

    Entries whose perturbation flips the sign of any LReLU input are skipped:
    the loss is not differentiable across the kink.

    The relative error is ``|a - n| / max(|a|, |n|, abs_floor)``. The floor keeps
    near-zero gradients, where central-difference roundoff (about 1e-11 at the
    default step) dominates, from reporting spurious failures.
    """
    if network.mode != "infer":
        raise ValueError("gradient check requires a deterministic (inference-mode) network")
    if precision not in ("high", "fast"):
        raise ValueError(f"unknown precision mode {precision!r}")
    net = network.astype(np.float64) if precision == "high" else network
    net.zero_grad()
    logits = net.forward(x, mode="infer", cache=True)
    probs = F.softmax(logits)
    base_signs = net.preactivation_signs()
    net.backward(F.softmax_cross_entropy_backward(probs, label, class_weight))
    worst, worst_name, checked, skipped = 0.0, "", 0, 0
    for p in net.params:
        analytic = p.grad.copy()
        flat = p.value.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + eps
            plus = _loss(net, x, label, class_weight)
            kink = not np.array_equal(net.preactivation_signs(), base_signs)
            flat[idx] = orig - eps
            minus = _loss(net, x, label, class_weight)
            kink = kink or not np.array_equal(net.preactivation_signs(), base_signs)
            flat[idx] = orig
            if kink:
                skipped += 1
                continue
            numeric = (plus - minus) / (2 * eps)
            a = analytic.reshape(-1)[idx]
            err = abs(a - numeric) / max(abs(a), abs(numeric), abs_floor)
            checked += 1
            if err > worst:
                worst, worst_name = err, f"{p.name}[{idx}]"
    return GradCheckResult(float(worst), checked, skipped, worst_name)


def finite_difference_check(network, x, label, eps=1e-4, precision="high", class_weight=1.0):
    """Worst relative gradient error over all parameters of ``network``."""
    return compare_gradients(network, x, label, eps, precision, class_weight).max_rel_error
