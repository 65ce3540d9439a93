"""Segmentation quality measures: adjusted Rand index and relative
Hausdorff distances between boundary sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InputError, Segmentation

__all__ = ["adjusted_rand_index", "hausdorff_distances", "metric_report",
           "MetricReport"]


@dataclass(frozen=True)
class MetricReport:
    ari: float
    d_true_to_est: float
    d_est_to_true: float
    hausdorff: float
    n_est_changepoints: int


def _comb2(x: np.ndarray) -> np.ndarray:
    return x * (x - 1) / 2.0


def adjusted_rand_index(a: Segmentation, b: Segmentation) -> float:
    """Hubert-Arabie adjusted Rand index of two segmentations of the same n.

    Computed from the contingency table of segment memberships. Equals 1
    exactly iff the segmentations are identical; 0 is the expected value of
    random label assignments. When both partitions are trivial the adjustment
    denominator vanishes; identical partitions then score 1, others 0.
    """
    if a.n != b.n:
        raise InputError(f"segmentations cover different n: {a.n} vs {b.n}")
    if a.boundaries == b.boundaries:
        return 1.0
    # contingency cell sizes are the gaps of the merged boundary set
    merged = np.array(sorted(set(a.boundaries) | set(b.boundaries)))
    cells = np.diff(merged)
    sum_cells = _comb2(cells).sum()
    rows = _comb2(np.asarray(a.segment_lengths(), dtype=np.float64)).sum()
    cols = _comb2(np.asarray(b.segment_lengths(), dtype=np.float64)).sum()
    total = _comb2(np.array([a.n], dtype=np.float64))[0]
    expected = rows * cols / total
    max_index = (rows + cols) / 2.0
    denom = max_index - expected
    if denom == 0.0:
        return 0.0
    return float((sum_cells - expected) / denom)


def _directed(a: Segmentation, b: Segmentation) -> float:
    pa = np.asarray(a.boundaries, dtype=np.int64)
    pb = np.asarray(b.boundaries, dtype=np.int64)
    worst = max(int(np.min(np.abs(pb - x))) for x in pa)
    return worst / a.n


def hausdorff_distances(a: Segmentation, b: Segmentation
                        ) -> tuple[float, float, float]:
    """(d(a, b), d(b, a), max): largest relative distance of a boundary in
    one set to its nearest counterpart in the other, both directions.

    Boundary sets always contain 0 and n, so both components lie in [0, 1].
    """
    if a.n != b.n:
        raise InputError(f"segmentations cover different n: {a.n} vs {b.n}")
    d_ab = _directed(a, b)
    d_ba = _directed(b, a)
    return d_ab, d_ba, max(d_ab, d_ba)


def metric_report(truth: Segmentation, estimate: Segmentation) -> MetricReport:
    d_te, d_et, haus = hausdorff_distances(truth, estimate)
    return MetricReport(
        ari=adjusted_rand_index(truth, estimate),
        d_true_to_est=d_te,
        d_est_to_true=d_et,
        hausdorff=haus,
        n_est_changepoints=len(estimate.changepoints),
    )
