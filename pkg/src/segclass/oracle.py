"""Exact population-level gain calculations over finite-support models.

These routines evaluate, in closed form, the expected classifier
log-likelihood ratio when the classifier is the exact Bayes classifier of a
model with piecewise-constant discrete distributions. They exist to turn
the method's population-level guarantees (the true segmentation maximizes
the expected gain; split-gain curves are piecewise convex; approximate-gain
curves are piecewise linear with a unique kink at a lone change point) into
executable checks, not to detect anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator

import numpy as np

from .core import InputError, SegmentBounds, Segmentation

__all__ = [
    "DiscreteDistribution", "PopulationModel", "mixture",
    "bayes_expected_gain", "bayes_split_gain_curve",
    "bayes_approximate_gain_curve", "enumerate_segmentations",
]


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability vector over a finite support."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.ndim != 1 or p.size < 1:
            raise InputError("probability vector must be 1-D and non-empty")
        if np.any(p < 0.0):
            raise InputError("probabilities must be non-negative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise InputError(f"probabilities must sum to 1, got {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def support_size(self) -> int:
        return self.p.size


@dataclass(frozen=True)
class PopulationModel:
    """Ground-truth segmentation plus one distribution per segment.

    Adjacent segments must have distinct distributions (otherwise the
    boundary between them would not be a change point).
    """

    truth: Segmentation
    distributions: tuple[DiscreteDistribution, ...]

    def __post_init__(self):
        dists = tuple(self.distributions)
        if len(dists) != self.truth.n_segments:
            raise InputError(
                f"need {self.truth.n_segments} distributions, got {len(dists)}")
        sizes = {d.support_size for d in dists}
        if len(sizes) != 1:
            raise InputError("all distributions must share one support")
        for a, b in zip(dists, dists[1:]):
            if np.array_equal(a.p, b.p):
                raise InputError("adjacent segments must differ in distribution")
        object.__setattr__(self, "distributions", dists)

    @property
    def n(self) -> int:
        return self.truth.n

    def per_index(self) -> np.ndarray:
        """(n, support) matrix whose row i is the distribution of X_{i+1}."""
        rows = np.empty((self.n, self.distributions[0].support_size))
        for k, (a, b) in enumerate(zip(self.truth.boundaries,
                                       self.truth.boundaries[1:])):
            rows[a:b] = self.distributions[k].p
        return rows

    def prefix(self) -> np.ndarray:
        """(n+1, support) prefix sums of the per-index distribution matrix."""
        P = self.per_index()
        out = np.zeros((self.n + 1, P.shape[1]))
        np.cumsum(P, axis=0, out=out[1:])
        return out


def mixture(model: PopulationModel, bounds: SegmentBounds) -> DiscreteDistribution:
    """Length-weighted mixture of the distributions overlapping (u, v]."""
    u, v = bounds.u, bounds.v
    if v > model.n:
        raise InputError(f"bounds ({u}, {v}] exceed model n={model.n}")
    total = np.zeros(model.distributions[0].support_size)
    for k, (a, b) in enumerate(zip(model.truth.boundaries,
                                   model.truth.boundaries[1:])):
        overlap = min(b, v) - max(a, u)
        if overlap > 0:
            total += overlap * model.distributions[k].p
    return DiscreteDistribution(total / (v - u))


def _rel_entropy_term(weight_dist: np.ndarray, num: np.ndarray,
                      den: np.ndarray) -> float:
    """sum_x w(x) log(num(x)/den(x)) with 0 * log(0/q) := 0.

    Rejects points where the weight is positive but the numerator or
    denominator vanishes: the model's supports do not overlap there and the
    expectation would be infinite.
    """
    live = weight_dist > 0.0
    if np.any(live & ((num <= 0.0) | (den <= 0.0))):
        raise InputError("non-overlapping supports: expected gain is infinite")
    out = np.zeros_like(weight_dist)
    np.divide(num, den, out=out, where=live)
    np.log(out, out=out, where=live)
    return float(np.sum(weight_dist[live] * out[live]))


def bayes_expected_gain(model: PopulationModel, alpha: Segmentation) -> float:
    """Exact expected gain of a candidate segmentation under the Bayes
    classifier: each segment contributes its length times the relative
    entropy of its mixture against the full-series mixture."""
    if alpha.n != model.n:
        raise InputError(f"alpha covers n={alpha.n}, model has n={model.n}")
    full = mixture(model, SegmentBounds(0, model.n)).p
    total = 0.0
    for a, b in zip(alpha.boundaries, alpha.boundaries[1:]):
        seg = mixture(model, SegmentBounds(a, b)).p
        total += (b - a) * _rel_entropy_term(seg, seg, full)
    return total


def bayes_split_gain_curve(model: PopulationModel, bounds: SegmentBounds
                           ) -> tuple[np.ndarray, np.ndarray]:
    """Expected gain of splitting (u, v] at every s = u..v (exact).

    The classifier is refit at each split: the left/right mixtures vary
    with s. Endpoints contribute zero by construction.
    """
    u, v = bounds.u, bounds.v
    if v > model.n:
        raise InputError(f"bounds ({u}, {v}] exceed model n={model.n}")
    base = mixture(model, bounds).p
    pre = model.prefix()
    s_values = np.arange(u, v + 1)
    gains = np.zeros(len(s_values))
    for j, s in enumerate(s_values):
        if s == u or s == v:
            continue
        left = (pre[s] - pre[u]) / (s - u)
        right = (pre[v] - pre[s]) / (v - s)
        gains[j] = (s - u) * _rel_entropy_term(left, left, base) \
            + (v - s) * _rel_entropy_term(right, right, base)
    return s_values, gains


def bayes_approximate_gain_curve(model: PopulationModel, bounds: SegmentBounds,
                                 s0: int) -> tuple[np.ndarray, np.ndarray]:
    """Expected approximate gain with the Bayes classifier fixed at guess s0.

    Per-observation contributions are constant within true segments, so the
    curve is piecewise linear with kinks only at change points.
    """
    u, v = bounds.u, bounds.v
    if not (u < s0 < v):
        raise InputError(f"guess s0={s0} must satisfy u < s0 < v")
    if v > model.n:
        raise InputError(f"bounds ({u}, {v}] exceed model n={model.n}")
    base = mixture(model, bounds).p
    left = mixture(model, SegmentBounds(u, s0)).p
    right = mixture(model, SegmentBounds(s0, v)).p
    per = model.per_index()
    a = np.array([_rel_entropy_term(per[i], left, base) for i in range(u, v)])
    b = np.array([_rel_entropy_term(per[i], right, base) for i in range(u, v)])
    s_values = np.arange(u, v + 1)
    gains = np.concatenate(([0.0], np.cumsum(a))) + \
        np.concatenate((np.cumsum(b[::-1])[::-1], [0.0]))
    return s_values, gains


def enumerate_segmentations(n: int) -> Iterator[Segmentation]:
    """All segmentations of n observations (2^(n-1) of them)."""
    interior = range(1, n)
    for r in range(n):
        for cut in combinations(interior, r):
            yield Segmentation((0,) + cut + (n,))
