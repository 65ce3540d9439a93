"""Per-observation classifier log-likelihood ratios and approximate gains.

Given class-1 probability predictions for the observations of a segment
(u, v] and a candidate split s, each observation contributes a pair of
capped log-likelihood ratios (one per class). Summing the class-1 column up
to a split and the class-2 column after it yields the approximate gain
curve, whose maximizer is the candidate change point.

Predictions are scaled by the inverse of the leave-one-out class prior
before the capped logarithm, so a prediction matching the prior contributes
exactly zero. The scaled ratio p/prior may exceed 1 (informative
predictions yield positive ratios, up to log_eta of the inverse minimal
prior); capping it at 1 was tried and rejected, because an uninformative
fit (everything near 0) would then always dominate an informative one
(sharply peaked but negative off-peak) in the cross-guess maximum and in
the permutation comparison. Ratios whose prior denominator is zero
(a leave-one-out class of size one) are undefined and contribute zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InputError, SegmentBounds, SegmentTooShortError, ceil_count

__all__ = [
    "log_eta",
    "oob_prior",
    "oob_priors",
    "likelihoods_from_predictions",
    "approximate_gain_curve",
    "LikelihoodMatrix",
    "GainCurve",
]


def log_eta(x, eta: float):
    """log((1 - eta) * x + eta), the logarithm capped from below at log(eta)."""
    return np.log((1.0 - eta) * np.asarray(x, dtype=np.float64) + eta)


def oob_prior(i: int, s: int, bounds: SegmentBounds) -> float:
    """Leave-one-out class-1 prior for observation i under split s of (u, v].

    Equals (s - u - 1) / (v - u - 1) if i <= s and (s - u) / (v - u - 1)
    otherwise: the fraction of class-1 observations among the v - u - 1
    training points left after removing i.
    """
    u, v = bounds.u, bounds.v
    if v - u < 2:
        raise InputError(f"segment ({u}, {v}] is too short for a LOO prior")
    if not (u < s < v):
        raise InputError(f"split s={s} must satisfy u < s < v for ({u}, {v}]")
    if not (u < i <= v):
        raise InputError(f"observation i={i} outside segment ({u}, {v}]")
    return (s - u - (1 if i <= s else 0)) / (v - u - 1)


def oob_priors(s: int, bounds: SegmentBounds) -> np.ndarray:
    """Vector of leave-one-out priors for all observations of (u, v]."""
    u, v = bounds.u, bounds.v
    if v - u < 2:
        raise InputError(f"segment ({u}, {v}] is too short for a LOO prior")
    if not (u < s < v):
        raise InputError(f"split s={s} must satisfy u < s < v for ({u}, {v}]")
    i = np.arange(u + 1, v + 1)
    return (s - u - (i <= s)) / (v - u - 1)


@dataclass(frozen=True)
class LikelihoodMatrix:
    """Log-likelihood ratios ell[i, k, j] for a segment and J candidate guesses.

    Axis 0 runs over the observations of (u, v] in time order, axis 1 over
    the two classes, axis 2 over the guesses.
    """

    segment: SegmentBounds
    guesses: tuple[int, ...]
    ell: np.ndarray

    def __post_init__(self):
        m = self.segment.length
        if self.ell.shape != (m, 2, len(self.guesses)):
            raise InputError(
                f"ell must have shape ({m}, 2, {len(self.guesses)}), "
                f"got {self.ell.shape}")


@dataclass(frozen=True)
class GainCurve:
    """Approximate gain over the guarded candidate range of a segment."""

    segment: SegmentBounds
    first_candidate: int
    values: np.ndarray
    argmax: int
    max_gain: float

    @property
    def candidates(self) -> np.ndarray:
        return self.first_candidate + np.arange(len(self.values))

    def value_at(self, s: int) -> float:
        return float(self.values[s - self.first_candidate])


def likelihoods_from_predictions(pred, s: int, bounds: SegmentBounds,
                                 eta: float) -> tuple[np.ndarray, np.ndarray]:
    """Both ratio columns (class 1, class 2) for a fixed prediction vector.

    ``pred`` holds class-1 probabilities for the observations of (u, v] in
    time order. A zero prior (single-observation class, leave-one-out) makes
    the corresponding ratio undefined; it is treated as "no information" and
    contributes log_eta(1) = 0.
    """
    pred = np.asarray(pred, dtype=np.float64)
    if pred.shape != (bounds.length,):
        raise InputError(
            f"expected {bounds.length} predictions for ({bounds.u}, {bounds.v}], "
            f"got shape {pred.shape}")
    if np.any(pred < 0.0) or np.any(pred > 1.0) or not np.all(np.isfinite(pred)):
        raise InputError("predictions must lie in [0, 1]")
    pi = oob_priors(s, bounds)
    ratio1 = np.where(pi > 0.0, pred / np.where(pi > 0.0, pi, 1.0), 1.0)
    q = 1.0 - pi
    ratio2 = np.where(q > 0.0, (1.0 - pred) / np.where(q > 0.0, q, 1.0), 1.0)
    return log_eta(ratio1, eta), log_eta(ratio2, eta)


def approximate_gain_curve(ell1, ell2, bounds: SegmentBounds, delta: float,
                           n: int) -> GainCurve:
    """Gain curve G(s) = sum_{i<=s} ell1_i + sum_{i>s} ell2_i via prefix sums.

    The candidate range is s in [u + 1 + ceil(delta*n), v - ceil(delta*n)]
    with n the length of the *full* series, not the segment. Ties in the
    argmax resolve to the smallest candidate.
    """
    ell1 = np.asarray(ell1, dtype=np.float64)
    ell2 = np.asarray(ell2, dtype=np.float64)
    u, v = bounds.u, bounds.v
    m = v - u
    if ell1.shape != (m,) or ell2.shape != (m,):
        raise InputError(f"need {m} values per class for ({u}, {v}]")
    g = ceil_count(delta * n)
    lo, hi = u + 1 + g, v - g
    if lo > hi:
        raise SegmentTooShortError(
            f"segment ({u}, {v}] admits no split with guard {g} (n={n})")
    p1 = np.cumsum(ell1)
    p2 = np.cumsum(ell2)
    total2 = p2[-1]
    # G(s) for s = lo..hi; local prefix index of s is s - u - 1
    sel = np.arange(lo - u - 1, hi - u)
    values = p1[sel] + (total2 - p2[sel])
    best = int(np.argmax(values))  # first occurrence wins on ties
    return GainCurve(segment=bounds, first_candidate=lo, values=values,
                     argmax=lo + best, max_gain=float(values[best]))
