"""Multivariate local linear regression with leave-one-out prediction.

The smoother fits, at each query point, a weighted least-squares hyperplane
using a product Epanechnikov kernel with one common scalar bandwidth for all
coordinates. Predictions are leave-one-out: the fit at row i never sees row i.

Every function here is pure; query points are independent, so callers may
evaluate subsets and bandwidths concurrently without affecting results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import BadSubset, NonPositiveBandwidth

# Ridge added to the local covariance: eps = RIDGE_SCALE * trace / d.
RIDGE_SCALE = 1e-8
# A local fit needs at least d + 2 positively weighted neighbours; below that
# the query bandwidth is inflated step by step, then the LOO mean takes over.
INFLATE_FACTOR = 1.5
MAX_INFLATIONS = 10

DEFAULT_MULTIPLIERS = (0.3, 0.5, 0.8, 1.2, 1.8, 2.7)


def epanechnikov(u):
    """Epanechnikov kernel max(0, 0.75*(1 - u^2)); support [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    return np.maximum(0.0, 0.75 * (1.0 - u * u))


@dataclass(frozen=True)
class BandwidthGrid:
    """Candidate bandwidths: multiplier * n^(-1/(d+4)) for subset size d."""

    multipliers: tuple[float, ...] = DEFAULT_MULTIPLIERS

    def __post_init__(self):
        mult = tuple(float(m) for m in self.multipliers)
        if not mult:
            raise ValueError("multiplier list must be nonempty")
        if any(m <= 0 for m in mult):
            raise ValueError("multipliers must be positive")
        if any(b <= a for a, b in zip(mult, mult[1:])):
            raise ValueError("multipliers must be strictly increasing")
        object.__setattr__(self, "multipliers", mult)

    @staticmethod
    def base_bandwidth(n: int, d: int) -> float:
        return float(n) ** (-1.0 / (d + 4))

    def bandwidths(self, n: int, d: int) -> list[float]:
        h0 = self.base_bandwidth(n, d)
        return [m * h0 for m in self.multipliers]


def subset_to_columns(subset, p: int) -> np.ndarray:
    """Validate a 1-based covariate subset and return 0-based column indices."""
    idx = list(subset)
    if not idx:
        raise BadSubset("subset is empty")
    cols = []
    for j in idx:
        if int(j) != j:
            raise BadSubset(f"subset index {j!r} is not an integer")
        j = int(j)
        if not 1 <= j <= p:
            raise BadSubset(f"subset index {j} outside 1..{p}")
        cols.append(j - 1)
    if len(set(cols)) != len(cols):
        raise BadSubset(f"subset {tuple(idx)} contains duplicate indices")
    return np.asarray(cols, dtype=np.intp)


def _product_weights(diffs: np.ndarray, h: float) -> np.ndarray:
    """Product Epanechnikov weights for pairwise differences (b, n, d)."""
    return epanechnikov(diffs / h).prod(axis=2)


def _fit_block(weights, z, y, queries):
    """Local linear LOO fits for one block of query rows.

    ``weights`` is (b, n) with the self-weight already zeroed; ``queries``
    holds the global row index of each block row.
    """
    d = z.shape[1]
    sw = weights.sum(axis=1)
    xbar = (weights @ z) / sw[:, None]
    ybar = (weights @ y) / sw

    zc = z[None, :, :] - xbar[:, None, :]            # (b, n, d)
    yc = y[None, :] - ybar[:, None]                  # (b, n)
    wzc = weights[:, :, None] * zc
    sigma = zc.transpose(0, 2, 1) @ wzc / sw[:, None, None]
    tvec = (wzc.transpose(0, 2, 1) @ yc[:, :, None])[:, :, 0] / sw[:, None]

    trace = sigma.trace(axis1=1, axis2=2)
    diag = np.arange(d)
    ridged = sigma.copy()
    ridged[:, diag, diag] += (RIDGE_SCALE / d) * trace[:, None]
    flat = trace <= 0.0
    if flat.any():
        # All weighted neighbours sit exactly at the query point: the slope is
        # unidentified and tvec is zero, so the fit reduces to ybar.
        ridged[flat] = np.eye(d)
    beta = np.linalg.solve(ridged, tvec[:, :, None])[:, :, 0]
    # Two refinement sweeps against the unridged normal equations keep the
    # ridge from perturbing well-posed fits (affine data stays exact) while
    # near-singular directions remain damped by the ridged solve.
    for _ in range(2):
        resid = tvec - np.einsum("bac,bc->ba", sigma, beta)
        beta += np.linalg.solve(ridged, resid[:, :, None])[:, :, 0]
    return ybar + np.einsum("ba,ba->b", z[queries] - xbar, beta)


def _loo_block(diffs, z, y, h, queries):
    """LOO predictions for the query rows described by ``diffs``."""
    n, d = z.shape
    b = diffs.shape[0]
    need = d + 2

    weights = _product_weights(diffs, h)
    local = np.arange(b)
    weights[local, queries] = 0.0
    counts = np.count_nonzero(weights, axis=1)

    pending = np.flatnonzero(counts < need)
    scale = h
    for _ in range(MAX_INFLATIONS):
        if pending.size == 0:
            break
        scale *= INFLATE_FACTOR
        wider = _product_weights(diffs[pending], scale)
        wider[np.arange(pending.size), queries[pending]] = 0.0
        weights[pending] = wider
        counts[pending] = np.count_nonzero(wider, axis=1)
        pending = pending[counts[pending] < need]

    preds = np.empty(b)
    solvable = counts >= need
    if not solvable.all():
        # Exhausted inflations: predict with the leave-one-out global mean.
        fallback = np.flatnonzero(~solvable)
        preds[fallback] = (y.sum() - y[queries[fallback]]) / (n - 1)
    rows = np.flatnonzero(solvable)
    if rows.size:
        preds[rows] = _fit_block(weights[rows], z, y, queries[rows])
    return preds


def loo_predict_grid(dataset: Dataset, subset, bandwidths) -> np.ndarray:
    """Leave-one-out predictions for several bandwidths at once.

    Returns an array of shape ``(len(bandwidths), n)`` whose row k equals
    ``loo_predict(dataset, subset, bandwidths[k])`` bit for bit; the pairwise
    covariate differences are shared across bandwidths.
    """
    if not dataset.standardized:
        raise ValueError("dataset must be standardized before smoothing")
    cols = subset_to_columns(subset, dataset.p)
    hs = [float(h) for h in bandwidths]
    if any(h <= 0 or not np.isfinite(h) for h in hs):
        raise NonPositiveBandwidth(f"bandwidths must be positive, got {hs}")

    z = dataset.x[:, cols]
    y = dataset.y
    n, d = z.shape
    out = np.empty((len(hs), n))

    # Block over query rows so the (block, n, d) difference tensor stays small.
    block = max(1, 4_000_000 // (n * d))
    for start in range(0, n, block):
        stop = min(start + block, n)
        queries = np.arange(start, stop)
        diffs = z[start:stop, None, :] - z[None, :, :]
        for k, h in enumerate(hs):
            out[k, start:stop] = _loo_block(diffs, z, y, h, queries)
    return out


def loo_predict(dataset: Dataset, subset, bandwidth: float) -> np.ndarray:
    """Leave-one-out local linear prediction at every observed row.

    Entry i is the fit at ``x_i`` over the selected covariate columns,
    computed from all rows except i. Neighbourhoods with fewer than d + 2
    positively weighted rows get the query bandwidth inflated by 1.5 up to
    10 times, then fall back to the leave-one-out mean of ``y``.
    """
    return loo_predict_grid(dataset, subset, [bandwidth])[0]
