"""Parametric change-in-mean baseline: Gaussian log-likelihood gain with a
full grid search, paired with binary segmentation and a BIC-shaped stopping
threshold.

The gain of splitting (u, v] at s under a unit-variance Gaussian model is

    G(s) = (s - u) (v - s) / (2 (v - u)) * ||mean(u, s] - mean(s, v]||^2,

the increase in maximized log-likelihood, computed coordinate-wise from
prefix sums. Variance is assumed known and equal to one (the ingestion
normalization is responsible for the scaling); no variance is estimated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (DetectionConfig, InputError, SegmentBounds, Segmentation,
                   SegmentTooShortError, as_series, ceil_count)
from .results import DetectionResult, SplitRecord

__all__ = ["mean_gain", "mean_gain_curve", "MeanGainCurve",
           "gamma_threshold", "mean_binary_segmentation", "GAMMA_COEFFICIENT"]

# Coefficient of the d*log(n) stopping threshold. Calibrated once on
# homogeneous standard-normal noise at n=600, d=5: the 99th percentile of the
# maximal root-segment gain over 4000 simulations, divided by d*log(n).
# Keeps the family-wise false-positive rate at or below ~1%.
GAMMA_COEFFICIENT = 0.38


def gamma_threshold(n: int, d: int) -> float:
    """Minimal gain required to accept a split: GAMMA_COEFFICIENT * d * log(n)."""
    return GAMMA_COEFFICIENT * d * float(np.log(n))


@dataclass(frozen=True)
class MeanGainCurve:
    """Gaussian gain over the guarded candidate range of a segment."""

    segment: SegmentBounds
    first_candidate: int
    values: np.ndarray
    argmax: int
    max_gain: float

    @property
    def candidates(self) -> np.ndarray:
        return self.first_candidate + np.arange(len(self.values))


def mean_gain(X, bounds: SegmentBounds, s: int) -> float:
    """Gain of splitting (u, v] at a single split s."""
    series = as_series(X)
    u, v = bounds.u, bounds.v
    if not (u < s < v):
        raise InputError(f"split s={s} must satisfy u < s < v for ({u}, {v}]")
    left = series.data[u:s].mean(axis=0)
    right = series.data[s:v].mean(axis=0)
    w = (s - u) * (v - s) / (2.0 * (v - u))
    diff = left - right
    return float(w * diff @ diff)


def _prefix(X: np.ndarray) -> np.ndarray:
    out = np.zeros((X.shape[0] + 1, X.shape[1]))
    np.cumsum(X, axis=0, out=out[1:])
    return out


def mean_gain_curve(X, bounds: SegmentBounds, delta: float, n: int,
                    prefix: np.ndarray | None = None) -> MeanGainCurve:
    """All admissible split gains of a segment in one prefix-sum pass."""
    series = as_series(X)
    u, v = bounds.u, bounds.v
    g = ceil_count(delta * n)
    lo, hi = u + 1 + g, v - g
    if lo > hi:
        raise SegmentTooShortError(
            f"segment ({u}, {v}] admits no split with guard {g} (n={n})")
    if prefix is None:
        prefix = _prefix(series.data)
    s = np.arange(lo, hi + 1)
    left = (prefix[s] - prefix[u]) / (s - u)[:, None]
    right = (prefix[v] - prefix[s]) / (v - s)[:, None]
    w = (s - u) * (v - s) / (2.0 * (v - u))
    diff = left - right
    values = w * np.einsum("ij,ij->i", diff, diff)
    best = int(np.argmax(values))
    return MeanGainCurve(segment=bounds, first_candidate=lo, values=values,
                         argmax=lo + best, max_gain=float(values[best]))


def mean_binary_segmentation(X, config: DetectionConfig,
                             gamma: float | None = None) -> DetectionResult:
    """Recursive grid-search splitting; a split is kept while its gain
    exceeds the threshold. Obeys the same delta guards as the classifier
    path."""
    series = as_series(X)
    n = series.n
    config.min_segment(n)  # validates delta*n >= 1
    if gamma is None:
        params = dict(config.method_params or {})
        gamma = float(params.get("gamma", gamma_threshold(n, series.d)))
    prefix = _prefix(series.data)
    log: list[SplitRecord] = []
    found: list[int] = []

    def recurse(u: int, v: int):
        if v - u < 2.0 * config.delta * n - 1e-9:
            return
        try:
            curve = mean_gain_curve(series, SegmentBounds(u, v), config.delta,
                                    n, prefix=prefix)
        except SegmentTooShortError:
            return
        accepted = curve.max_gain > gamma
        log.append(SplitRecord(
            u=u, v=v, guesses=(), s1=None, s_hat=curve.argmax,
            step1_max_gain=curve.max_gain, best_gain=curve.max_gain,
            p_value=None, accepted=accepted))
        if accepted:
            found.append(curve.argmax)
            recurse(u, curve.argmax)
            recurse(curve.argmax, v)

    recurse(0, n)
    boundaries = (0,) + tuple(sorted(found)) + (n,)
    return DetectionResult(segmentation=Segmentation(boundaries),
                           split_log=tuple(log), engine_fits=0)
