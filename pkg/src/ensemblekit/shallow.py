"""Shallow ensemble: convex combination of per-model probability tables
with 0/1-loss-driven weight selection over a simplex grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ROW_SUM_TOL = 1e-6


@dataclass
class ProbabilityTable:
    source_id: str
    probs: np.ndarray  # (n, c), rows are probability vectors

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.ndim != 2:
            raise ValueError("probs must be 2-D")
        if (self.probs < -ROW_SUM_TOL).any() or (self.probs > 1.0 + ROW_SUM_TOL).any():
            raise ValueError("probabilities out of [0, 1]")
        if np.abs(self.probs.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
            raise ValueError("probability rows must sum to 1")


@dataclass
class SimplexWeights:
    alpha: np.ndarray

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        if self.alpha.ndim != 1 or self.alpha.size == 0:
            raise ValueError("alpha must be a non-empty vector")
        if (self.alpha < 0).any() or (self.alpha > 1).any():
            raise ValueError("alpha entries must lie in [0, 1]")
        if abs(float(self.alpha.sum()) - 1.0) > 1e-9:
            raise ValueError("alpha must sum to 1")


def _check_tables(tables: list[ProbabilityTable]) -> tuple[int, int]:
    if not tables:
        raise ValueError("empty table list")
    n, c = tables[0].probs.shape
    for t in tables[1:]:
        if t.probs.shape != (n, c):
            raise ValueError(
                f"shape mismatch: {t.source_id!r} has {t.probs.shape}, expected {(n, c)}"
            )
    return n, c


def combine(tables: list[ProbabilityTable], alpha: SimplexWeights) -> ProbabilityTable:
    """Per-sample convex combination of the tables' rows."""
    _check_tables(tables)
    if len(tables) != alpha.alpha.size:
        raise ValueError(f"{len(tables)} tables but {alpha.alpha.size} weights")
    mixed = sum(a * t.probs for a, t in zip(alpha.alpha, tables))
    return ProbabilityTable(source_id="combined", probs=mixed)


def predict(tables: list[ProbabilityTable], alpha: SimplexWeights) -> np.ndarray:
    """Argmax labels of the combined table; ties go to the smallest class."""
    return np.argmax(combine(tables, alpha).probs, axis=1)


def zero_one_loss(pred, gold) -> int:
    pred = np.asarray(pred, dtype=np.int64)
    gold = np.asarray(gold, dtype=np.int64)
    if pred.shape != gold.shape:
        raise ValueError("length mismatch")
    return int(np.count_nonzero(pred != gold))


def _lattice(n_models: int, steps: int):
    """All weight tuples on the simplex grid, lexicographically descending.

    Iteration order implements the tie-break: earlier (larger-first-weight)
    candidates win ties.
    """
    if n_models == 1:
        yield (steps,)
        return
    for first in range(steps, -1, -1):
        for rest in _lattice(n_models - 1, steps - first):
            yield (first, *rest)


def fit_alpha(
    tables: list[ProbabilityTable], gold, grid_step: float = 0.1
) -> tuple[SimplexWeights, int]:
    """Grid-search the simplex for the 0/1-loss-minimizing weights."""
    _check_tables(tables)
    if len(tables) > 4:
        raise ValueError("simplex grid search supports at most 4 models")
    steps = int(round(1.0 / grid_step))
    if abs(steps * grid_step - 1.0) > 1e-9 or steps < 1:
        raise ValueError(f"grid_step {grid_step} must divide 1 evenly")
    best: tuple[SimplexWeights, int] | None = None
    for point in _lattice(len(tables), steps):
        alpha = SimplexWeights(np.array(point, dtype=np.float64) / steps)
        loss = zero_one_loss(predict(tables, alpha), gold)
        if best is None or loss < best[1]:
            best = (alpha, loss)
    return best
