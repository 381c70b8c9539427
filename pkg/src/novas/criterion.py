"""Leave-one-out cross-validation criterion and gain statistics.

The score of a covariate subset J is the weighted sum of squared LOO
prediction errors over all n rows. The common bandwidth for J is whichever
grid value minimizes that score (ties go to the smaller bandwidth).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ZeroPreviousScore
from .smoothing import BandwidthGrid, loo_predict_grid, subset_to_columns


@dataclass(frozen=True)
class SubsetCandidate:
    """A scored covariate subset: canonical indices, score, chosen bandwidth."""

    indices: tuple[int, ...]
    score: float
    bandwidth: float

    def __post_init__(self):
        idx = tuple(int(j) for j in self.indices)
        if not idx or any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices must be nonempty and strictly increasing: {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return len(self.indices)

    def sort_key(self):
        # Ascending score, then smaller cardinality, then lexicographic order.
        return (self.score, len(self.indices), self.indices)


@dataclass(frozen=True)
class WeightFn:
    """Nonnegative weight applied to each observation's covariate subvector.

    ``unit`` weights every row by 1. ``box`` weights a row by the indicator
    that every selected coordinate lies within [lower_j, upper_j]; bounds may
    be scalars (shared by all covariates) or per-covariate length-p vectors.
    """

    kind: str = "unit"
    lower: float | np.ndarray | None = None
    upper: float | np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("unit", "box"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "box" and (self.lower is None or self.upper is None):
            raise ValueError("box weight needs lower and upper bounds")

    def values(self, dataset: Dataset, subset) -> np.ndarray | None:
        """Per-row weights for the given subset, or None for the unit weight."""
        if self.kind == "unit":
            return None
        cols = subset_to_columns(subset, dataset.p)
        z = dataset.x[:, cols]
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        if lo.ndim == 1:
            lo = lo[cols]
        if hi.ndim == 1:
            hi = hi[cols]
        inside = (z >= lo) & (z <= hi)
        return inside.all(axis=1).astype(np.float64)


UNIT_WEIGHT = WeightFn("unit")


def _score_residuals(y: np.ndarray, preds: np.ndarray, wvec: np.ndarray | None) -> float:
    resid = y - preds
    if wvec is None:
        return float(np.dot(resid, resid))
    return float(np.dot(resid * resid, wvec))


def cv_score(dataset: Dataset, subset, bandwidth: float,
             weight: WeightFn | None = None) -> float:
    """Weighted sum of squared leave-one-out errors for one subset/bandwidth."""
    preds = loo_predict_grid(dataset, subset, [bandwidth])[0]
    wvec = None if weight is None else weight.values(dataset, subset)
    return _score_residuals(dataset.y, preds, wvec)


def grid_scores(dataset: Dataset, subset, grid: BandwidthGrid | None = None,
                weight: WeightFn | None = None) -> tuple[list[float], np.ndarray]:
    """CV scores over the whole bandwidth grid: ``(bandwidths, scores)``."""
    grid = grid or BandwidthGrid()
    hs = grid.bandwidths(dataset.n, len(tuple(subset)))
    preds = loo_predict_grid(dataset, subset, hs)
    wvec = None if weight is None else weight.values(dataset, subset)
    scores = np.array([_score_residuals(dataset.y, preds[k], wvec)
                       for k in range(len(hs))])
    return hs, scores


def select_bandwidth(dataset: Dataset, subset, grid: BandwidthGrid | None = None,
                     weight: WeightFn | None = None) -> tuple[float, float]:
    """Pick the grid bandwidth minimizing the CV score for this subset.

    Returns ``(bandwidth, score)``; exact score ties resolve to the smaller
    bandwidth (the grid is ascending and argmin takes the first minimum).
    """
    hs, scores = grid_scores(dataset, subset, grid, weight)
    k = int(np.argmin(scores))
    return hs[k], float(scores[k])


def relative_gain(prev_best: float, next_best: float) -> float:
    """Relative improvement (prev - next) / prev between consecutive stages."""
    if prev_best == 0.0:
        raise ZeroPreviousScore("previous best score is zero; fit is already perfect")
    return (prev_best - next_best) / prev_best
