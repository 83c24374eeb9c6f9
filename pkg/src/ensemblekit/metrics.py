"""Accuracy, confusion matrix, and multi-class Cohen's kappa.

kappa = (p_o - p_e) / (1 - p_e), where p_o is the observed agreement
between the prediction and gold lists and p_e the chance agreement from
their marginal class distributions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # (c, c) ints; rows = gold, columns = predicted
    total: int


def _check_pair(pred, gold) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.int64)
    gold = np.asarray(gold, dtype=np.int64)
    if pred.shape != gold.shape or pred.ndim != 1:
        raise ValueError(f"length mismatch: {pred.shape} vs {gold.shape}")
    if pred.size == 0:
        raise ValueError("empty label lists")
    return pred, gold


def accuracy(pred, gold) -> float:
    pred, gold = _check_pair(pred, gold)
    return float(np.count_nonzero(pred == gold)) / pred.size


def confusion(pred, gold, c: int) -> ConfusionMatrix:
    """Cell (g, p) counts samples with gold label g predicted as p."""
    pred, gold = _check_pair(pred, gold)
    if pred.min() < 0 or gold.min() < 0 or pred.max() >= c or gold.max() >= c:
        raise ValueError(f"label out of range for c={c}")
    counts = np.bincount(gold * c + pred, minlength=c * c).reshape(c, c)
    return ConfusionMatrix(counts=counts, total=int(pred.size))


def cohen_kappa(pred, gold, c: int) -> float:
    """Chance-corrected agreement between two label sequences.

    Returns 1.0 in the fully degenerate case p_e = 1 (both marginals
    concentrated on one class, which forces p_o = 1 as well).
    """
    cm = confusion(pred, gold, c)
    p_o = accuracy(pred, gold)
    gold_marginal = cm.counts.sum(axis=1) / cm.total
    pred_marginal = cm.counts.sum(axis=0) / cm.total
    p_e = float(np.dot(gold_marginal, pred_marginal))
    if p_e >= 1.0:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)
