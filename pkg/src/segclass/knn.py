"""k-nearest-neighbor engine with leave-one-out class-probability estimates.

All pairwise Euclidean distances are computed once per detection run and
recycled for every segment encountered during the recursion. Within a
segment (u, v] the neighborhood size is k = floor(sqrt(v - u)), re-derived
per segment, and the class-1 probability of an observation is the fraction
of its k nearest neighbors (itself excluded) that lie at or before the
candidate split.

Tied distances at the k-th neighbor are shared proportionally: neighbors
strictly closer than the k-th distance count fully and the tie group splits
the remaining weight evenly. This keeps predictions deterministic and, for
geometrically uninformative data (all rows identical), reproduces the
leave-one-out prior exactly, so duplicated rows cannot fake a signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import InputError, SegmentBounds, TimeSeriesMatrix, as_series

__all__ = ["DistanceCache", "build_distance_cache", "loo_predict",
           "DEFAULT_CACHE_CAP"]

DEFAULT_CACHE_CAP = 20000


@dataclass(frozen=True)
class DistanceCache:
    """Symmetric n-by-n Euclidean distance matrix with a zero diagonal."""

    distances: np.ndarray

    @property
    def n(self) -> int:
        return self.distances.shape[0]


def build_distance_cache(X, cap: int = DEFAULT_CACHE_CAP) -> DistanceCache:
    """Exact pairwise Euclidean distances, O(n^2 d) time and O(n^2) memory.

    Refuses series longer than ``cap`` rows: the cache is quadratic and this
    engine targets moderately sized inputs.
    """
    series = as_series(X)
    n = series.n
    if n > cap:
        raise InputError(
            f"series has {n} rows but the distance cache is capped at {cap}; "
            f"raise the cap explicitly if the O(n^2) memory cost is acceptable")
    data = series.data
    out = np.empty((n, n), dtype=np.float64)
    block = max(1, int(2**22 // max(1, n)))
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        diff = data[lo:hi, None, :] - data[None, :, :]
        # plain sum keeps the coordinate summation order of a naive
        # per-pair recomputation, so the cache matches it bit for bit
        np.sqrt((diff * diff).sum(axis=-1), out=out[lo:hi])
    return DistanceCache(distances=out)


def loo_predict(cache: DistanceCache, bounds: SegmentBounds, s: int) -> np.ndarray:
    """Leave-one-out class-1 probabilities for the observations of (u, v].

    Class 1 is "index <= s". k = floor(sqrt(v - u)), at least 1.
    """
    u, v = bounds.u, bounds.v
    m = v - u
    if m < 2:
        raise InputError(f"segment ({u}, {v}] too short for LOO prediction")
    if not (u < s < v):
        raise InputError(f"split s={s} must satisfy u < s < v for ({u}, {v}]")
    if v > cache.n:
        raise InputError(f"segment ({u}, {v}] outside cached series of n={cache.n}")
    k = max(1, math.isqrt(m))
    dist = cache.distances[u:v, u:v].copy()
    np.fill_diagonal(dist, np.inf)
    y = (np.arange(u + 1, v + 1) <= s).astype(np.float64)
    kth = np.partition(dist, k - 1, axis=1)[:, k - 1]
    closer = dist < kth[:, None]
    tied = dist == kth[:, None]
    n_closer = closer.sum(axis=1)
    n_tied = tied.sum(axis=1)
    ones_closer = closer @ y
    ones_tied = tied @ y
    share = (k - n_closer) / n_tied
    return (ones_closer + share * ones_tied) / k
