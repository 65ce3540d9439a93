"""Seed-deterministic generators for the benchmark scenarios.

Synthetic setups: a mean-shift series (CIM), a covariance-shift series
(CIC) and a Dirichlet series with ten change points. Dataset-derived
setups build labelled time series by shuffling and concatenating the
classes of a classification dataset, resampling classes into segments of
randomized lengths, or shuffling the largest class to obtain change-free
data for false-positive studies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import InputError, Segmentation, TimeSeriesMatrix, make_rng_stream

__all__ = [
    "LabeledSeries", "ScenarioSpec",
    "gen_cim", "gen_cic", "gen_dirichlet",
    "gen_dataset_concat", "gen_variable_k", "gen_homogeneous_shuffle",
]

# stream tags keeping every generator on its own seed-derived stream
_TAG_CIM = 11
_TAG_CIC = 12
_TAG_DIRICHLET = 13
_TAG_CONCAT = 14
_TAG_VARK = 15
_TAG_SHUFFLE = 16

DIRICHLET_BOUNDARIES = (0, 100, 130, 220, 320, 370, 520, 620, 740, 790, 870, 1000)


@dataclass(frozen=True)
class LabeledSeries:
    """A simulated series together with its ground-truth segmentation."""

    X: TimeSeriesMatrix
    truth: Segmentation

    def __post_init__(self):
        if self.truth.n != self.X.n:
            raise InputError(
                f"truth covers n={self.truth.n} but series has n={self.X.n}")


def gen_cim(seed: int) -> LabeledSeries:
    """Mean-shift setup: n=600, d=5, standard normal with the middle
    segment (200, 400] shifted by 2 in every coordinate."""
    rng = make_rng_stream(seed, _TAG_CIM)
    X = rng.standard_normal((600, 5))
    X[200:400] += 2.0
    return LabeledSeries(X=TimeSeriesMatrix(X),
                         truth=Segmentation((0, 200, 400, 600)))


def _equicorrelation_sqrt(d: int, rho: float) -> np.ndarray:
    cov = np.full((d, d), rho)
    np.fill_diagonal(cov, 1.0)
    w, v = np.linalg.eigh(cov)
    return v @ np.diag(np.sqrt(w)) @ v.T


def gen_cic(seed: int) -> LabeledSeries:
    """Covariance-shift setup: n=600, d=5, zero mean and unit variances
    everywhere; the middle segment has off-diagonal correlation 0.7."""
    rng = make_rng_stream(seed, _TAG_CIC)
    X = rng.standard_normal((600, 5))
    X[200:400] = X[200:400] @ _equicorrelation_sqrt(5, 0.7)
    return LabeledSeries(X=TimeSeriesMatrix(X),
                         truth=Segmentation((0, 200, 400, 600)))


def _dirichlet_rows(rng: np.random.Generator, length: int, d: int,
                    low: float, high: float) -> np.ndarray:
    alpha = rng.uniform(low, high, size=d)
    while np.any(alpha == 0.0):  # measure-zero guard; keeps parameters valid
        redraw = alpha == 0.0
        alpha[redraw] = rng.uniform(low, high, size=int(redraw.sum()))
    rows = rng.gamma(shape=alpha, scale=1.0, size=(length, d))
    sums = rows.sum(axis=1)
    while np.any(sums == 0.0):  # tiny shapes can underflow a whole row
        bad = np.flatnonzero(sums == 0.0)
        rows[bad] = rng.gamma(shape=alpha, scale=1.0, size=(len(bad), d))
        sums = rows.sum(axis=1)
    return rows / sums[:, None]


def gen_dirichlet(seed: int) -> LabeledSeries:
    """Dirichlet setup: n=1000, d=20, ten change points; each segment's
    parameters are drawn i.i.d. uniformly from [0, 0.2]."""
    rng = make_rng_stream(seed, _TAG_DIRICHLET)
    truth = Segmentation(DIRICHLET_BOUNDARIES)
    blocks = [_dirichlet_rows(rng, length, 20, 0.0, 0.2)
              for length in truth.segment_lengths()]
    return LabeledSeries(X=TimeSeriesMatrix(np.vstack(blocks)), truth=truth)


def gen_dataset_concat(features, labels, delta: float, seed: int) -> LabeledSeries:
    """Shuffle-and-concatenate a labelled dataset into a time series.

    Classes with fewer than delta * n observations are discarded; the order
    of the surviving classes and the row order within each class are both
    uniformly shuffled. Ground-truth boundaries sit at the class transitions.
    """
    X = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if X.ndim != 2 or len(labels) != X.shape[0]:
        raise InputError("features must be 2-D with one label per row")
    n_total = X.shape[0]
    classes, counts = np.unique(labels, return_counts=True)
    keep = classes[counts >= delta * n_total]
    if len(keep) < 2:
        raise InputError(
            f"need at least 2 classes with >= delta*n rows, got {len(keep)}")
    rng = make_rng_stream(seed, _TAG_CONCAT)
    order = rng.permutation(len(keep))
    blocks = []
    lengths = []
    for ci in order:
        rows = np.flatnonzero(labels == keep[ci])
        rows = rows[rng.permutation(len(rows))]
        blocks.append(X[rows])
        lengths.append(len(rows))
    return LabeledSeries(X=TimeSeriesMatrix(np.vstack(blocks)),
                         truth=Segmentation.from_lengths(lengths))


def _segment_lengths(rng: np.random.Generator, n: int, K: int) -> np.ndarray:
    """Randomized lengths with minimum relative length 1/(10K), rounded so
    they sum to n; the +-1 rounding repairs go to the largest segments."""
    raw = rng.exponential(1.0, size=K)
    rel = 1.0 / (10 * K) + 0.9 * raw / raw.sum()
    target = n * rel
    lengths = np.rint(target).astype(np.int64)
    diff = n - int(lengths.sum())
    order = np.argsort(-target, kind="stable")
    step = 1 if diff > 0 else -1
    for i in range(abs(diff)):
        lengths[order[i % K]] += step
    if lengths.min() < 1:
        raise InputError(f"infeasible (n={n}, K={K}): a segment would be empty")
    return lengths


def gen_variable_k(source: str, n: int, K: int, seed: int,
                   features=None, labels=None) -> LabeledSeries:
    """Series of arbitrary length with K segments of randomized lengths.

    ``source`` is "dirichlet" (fresh parameters per segment) or
    "dataset_resample" (rows of a labelled dataset drawn with replacement,
    consecutive segment classes always differ, standard Gaussian noise
    added). Covariates of the dataset variant are pre-scaled so the average
    within-class variance is one per covariate.
    """
    if K < 1:
        raise InputError("K must be >= 1")
    if n < 20 * K:
        raise InputError(f"need n >= 20*K for non-degenerate segments, "
                         f"got n={n}, K={K}")
    rng = make_rng_stream(seed, (_TAG_VARK, n, K))
    lengths = _segment_lengths(rng, n, K)
    if source == "dirichlet":
        blocks = [_dirichlet_rows(rng, int(length), 20, 0.0, 0.2)
                  for length in lengths]
    elif source == "dataset_resample":
        if features is None or labels is None:
            raise InputError("dataset_resample needs features and labels")
        X = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels)
        classes = np.unique(labels)
        if len(classes) < 2:
            raise InputError("dataset_resample needs at least 2 classes")
        class_rows = [np.flatnonzero(labels == c) for c in classes]
        # average within-class variance -> 1 per covariate
        scale = np.sqrt(np.mean([X[r].var(axis=0) for r in class_rows], axis=0))
        X = X / np.where(scale > 0.0, scale, 1.0)
        blocks = []
        prev = -1
        for length in lengths:
            c = int(rng.integers(0, len(classes) - (prev >= 0)))
            if prev >= 0 and c >= prev:
                c += 1  # skip the previous class
            rows = class_rows[c]
            picks = rows[rng.integers(0, len(rows), size=int(length))]
            blocks.append(X[picks] + rng.standard_normal((int(length), X.shape[1])))
            prev = c
    else:
        raise InputError(f"unknown variable-K source {source!r}")
    return LabeledSeries(X=TimeSeriesMatrix(np.vstack(blocks)),
                         truth=Segmentation.from_lengths(lengths))


def gen_homogeneous_shuffle(features, labels, seed: int) -> TimeSeriesMatrix:
    """Rows of the largest class only, uniformly permuted: change-free data
    for false-positive studies. Ties go to the first class in sorted order."""
    X = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    largest = classes[int(np.argmax(counts))]
    rows = np.flatnonzero(labels == largest)
    rng = make_rng_stream(seed, _TAG_SHUFFLE)
    return TimeSeriesMatrix(X[rows[rng.permutation(len(rows))]])


_SYNTHETIC = {"cim": gen_cim, "cic": gen_cic, "dirichlet": gen_dirichlet}


@dataclass(frozen=True)
class ScenarioSpec:
    """A named scenario plus its parameters, resolvable per seed.

    Kinds: cim | cic | dirichlet | dataset_concat | dataset_resample |
    homogeneous_shuffle. Dataset kinds expect ``features`` and ``labels``
    in params; variable-length generation uses ``n`` and ``K``.
    """

    kind: str
    params: Mapping = field(default_factory=dict)

    def generate(self, seed: int):
        p = dict(self.params)
        if self.kind in _SYNTHETIC:
            return _SYNTHETIC[self.kind](seed)
        if self.kind == "dataset_concat":
            return gen_dataset_concat(p["features"], p["labels"],
                                      p.get("delta", 0.01), seed)
        if self.kind == "dataset_resample":
            return gen_variable_k("dataset_resample", p["n"], p["K"], seed,
                                  features=p["features"], labels=p["labels"])
        if self.kind == "variable_dirichlet":
            return gen_variable_k("dirichlet", p["n"], p["K"], seed)
        if self.kind == "homogeneous_shuffle":
            base = p["base"]
            series = _SYNTHETIC[base](seed) if base in _SYNTHETIC else None
            if series is None:
                return gen_homogeneous_shuffle(p["features"], p["labels"], seed)
            return gen_homogeneous_shuffle(series.X.data,
                                           series.truth.labels(), seed)
        raise InputError(f"unknown scenario kind {self.kind!r}")
