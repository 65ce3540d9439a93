"""Binary-classification random forest with out-of-bag probability estimates.

Trees are standard CART: Gini impurity, axis-aligned thresholds at midpoints
between consecutive distinct values, bootstrap samples of the segment size.
The out-of-bag probability for an observation averages, over the trees
whose bootstrap sample excluded it, the class-1 fraction of the leaf it
falls into. Averaging leaf fractions (rather than counting majority votes)
keeps the predictions calibrated: under no signal they concentrate around
the class prior, which the downstream prior-scaled ratios require. The
majority-vote rule remains available via ``aggregation="vote"`` (ties go
to class 1) but systematically sharpens predictions toward 0/1 for
unbalanced splits. Observations that are in-bag everywhere fall back to
the leave-one-out prior, which contributes a zero ratio downstream.

All randomness is drawn up front from the caller's stream (bootstrap rows
and per-node feature draws, one block per tree), so training is bit-
reproducible regardless of the number of worker threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .core import InputError

__all__ = ["ForestParams", "OobPrediction", "fit_predict_oob",
           "fit_predict_insample", "fit_forest_debug", "ForestDebug"]

_UNLIMITED_DEPTH = 1 << 30


@dataclass(frozen=True)
class ForestParams:
    """Forest hyperparameters; defaults follow the library-wide defaults
    (100 trees of depth 8, mtry = floor(sqrt(d)))."""

    n_trees: int = 100
    max_depth: int | None = 8
    mtry: int | None = None
    min_leaf: int = 1
    aggregation: str = "probability"

    def __post_init__(self):
        if self.n_trees < 1:
            raise InputError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise InputError("max_depth must be >= 1 or None (unlimited)")
        if self.mtry is not None and self.mtry < 1:
            raise InputError("mtry must be >= 1")
        if self.min_leaf < 1:
            raise InputError("min_leaf must be >= 1")
        if self.aggregation not in ("probability", "vote"):
            raise InputError("aggregation must be 'probability' or 'vote'")

    def resolve_mtry(self, d: int) -> int:
        if self.mtry is None:
            return max(1, int(np.sqrt(d)))
        if self.mtry > d:
            raise InputError(f"mtry={self.mtry} exceeds dimension d={d}")
        return self.mtry

    def resolve_depth(self) -> int:
        return _UNLIMITED_DEPTH if self.max_depth is None else self.max_depth


@dataclass(frozen=True)
class OobPrediction:
    """Class-1 probabilities plus the per-observation count of OOB trees."""

    probs: np.ndarray
    oob_counts: np.ndarray


@njit(cache=True)
def _build_tree(X, yb, idx, draws, max_depth, mtry, min_leaf,
                node_feat, node_thr, node_left, node_right, node_leaf,
                node_depth, node_size, node_ones, stack, tmp, vals):
    """Grow one CART tree over the bootstrap indices in ``idx`` (in place).

    Returns the number of nodes. ``draws`` supplies uint64 randomness for
    the per-node feature subsampling; consumption never exceeds the buffer
    by construction (at most mtry draws per split-eligible node).
    """
    m = idx.shape[0]
    d = X.shape[1]
    feat_pool = np.empty(d, np.int64)
    for j in range(d):
        feat_pool[j] = j
    n_nodes = 1
    dptr = 0
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = m
    stack[0, 3] = 0
    top = 1
    while top > 0:
        top -= 1
        nid = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        k = end - start
        n1 = 0
        for p in range(start, end):
            n1 += yb[idx[p]]
        n0 = k - n1
        node_depth[nid] = depth
        node_size[nid] = k
        node_ones[nid] = n1
        if n1 == 0 or n0 == 0 or depth >= max_depth or k < 2 * min_leaf:
            node_leaf[nid] = 1 if n1 >= n0 else 0
            continue
        best_proxy = -1.0
        best_f = -1
        best_thr = 0.0
        for jj in range(mtry):
            r = draws[dptr]
            dptr += 1
            pick = jj + int(r % np.uint64(d - jj))
            t = feat_pool[jj]
            feat_pool[jj] = feat_pool[pick]
            feat_pool[pick] = t
            f = feat_pool[jj]
            for p in range(k):
                vals[p] = X[idx[start + p], f]
            order = np.argsort(vals[:k])
            c1 = 0
            for p in range(1, k):
                c1 += yb[idx[start + order[p - 1]]]
                if vals[order[p]] <= vals[order[p - 1]]:
                    continue
                if p < min_leaf or (k - p) < min_leaf:
                    continue
                l1 = float(c1)
                r1 = float(n1 - c1)
                nl = float(p)
                nr = float(k - p)
                proxy = (l1 * l1 + (nl - l1) * (nl - l1)) / nl \
                    + (r1 * r1 + (nr - r1) * (nr - r1)) / nr
                if proxy > best_proxy:
                    best_proxy = proxy
                    best_f = f
                    best_thr = (vals[order[p - 1]] + vals[order[p]]) / 2.0
                    # the midpoint of two adjacent floats can round up to the
                    # larger one, which would send both sides left; fall back
                    # to the lower value so the partition is exact
                    if best_thr >= vals[order[p]]:
                        best_thr = vals[order[p - 1]]
        if best_f < 0:
            # all sampled features constant on this node
            node_leaf[nid] = 1 if n1 >= n0 else 0
            continue
        nl = 0
        for p in range(start, end):
            if X[idx[p], best_f] <= best_thr:
                tmp[nl] = idx[p]
                nl += 1
        nr = nl
        for p in range(start, end):
            if X[idx[p], best_f] > best_thr:
                tmp[nr] = idx[p]
                nr += 1
        for p in range(k):
            idx[start + p] = tmp[p]
        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        node_feat[nid] = best_f
        node_thr[nid] = best_thr
        node_left[nid] = left_id
        node_right[nid] = right_id
        node_leaf[nid] = -1
        stack[top, 0] = left_id
        stack[top, 1] = start
        stack[top, 2] = start + nl
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = right_id
        stack[top, 1] = start + nl
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
    return n_nodes


@njit(cache=True)
def _leaf_of(X, i, node_feat, node_thr, node_left, node_right, node_leaf):
    nid = 0
    while node_leaf[nid] < 0:
        if X[i, node_feat[nid]] <= node_thr[nid]:
            nid = node_left[nid]
        else:
            nid = node_right[nid]
    return nid


@njit(cache=True, parallel=True)
def _forest_votes(X, n_left, boot, draws, max_depth, mtry, min_leaf,
                  oob_only, proba):
    """Per-tree contributions. Row t holds tree t's class-1 value (leaf
    fraction if ``proba`` else its 0/1 majority vote) and a voted flag per
    observation; with ``oob_only`` trees skip their in-bag rows."""
    n_trees = boot.shape[0]
    m = X.shape[0]
    votes = np.zeros((n_trees, m), np.float64)
    voted = np.zeros((n_trees, m), np.uint8)
    yb = np.zeros(m, np.int64)
    for i in range(n_left):
        yb[i] = 1
    max_nodes = 2 * m + 2
    for t in prange(n_trees):
        inbag = np.zeros(m, np.uint8)
        idx = np.empty(m, np.int64)
        for p in range(m):
            idx[p] = boot[t, p]
            inbag[boot[t, p]] = 1
        node_feat = np.zeros(max_nodes, np.int64)
        node_thr = np.zeros(max_nodes, np.float64)
        node_left = np.zeros(max_nodes, np.int64)
        node_right = np.zeros(max_nodes, np.int64)
        node_leaf = np.full(max_nodes, -2, np.int64)
        node_depth = np.zeros(max_nodes, np.int64)
        node_size = np.zeros(max_nodes, np.int64)
        node_ones = np.zeros(max_nodes, np.int64)
        stack = np.empty((m + 2 * max_depth + 4 if max_depth < m else 3 * m + 4, 4),
                         np.int64)
        tmp = np.empty(m, np.int64)
        vals = np.empty(m, np.float64)
        _build_tree(X, yb, idx, draws[t], max_depth, mtry, min_leaf,
                    node_feat, node_thr, node_left, node_right, node_leaf,
                    node_depth, node_size, node_ones, stack, tmp, vals)
        for i in range(m):
            if oob_only and inbag[i] == 1:
                continue
            nid = _leaf_of(X, i, node_feat, node_thr,
                           node_left, node_right, node_leaf)
            if proba:
                votes[t, i] = node_ones[nid] / node_size[nid]
            else:
                votes[t, i] = node_leaf[nid]
            voted[t, i] = 1
    return votes, voted


def _draw_randomness(m: int, d: int, params: ForestParams, mtry: int,
                     rng: np.random.Generator):
    depth = params.resolve_depth()
    budget = mtry * min(2 * m, 1 << min(depth, 24))
    boot = rng.integers(0, m, size=(params.n_trees, m), dtype=np.int64)
    draws = rng.integers(0, np.iinfo(np.uint64).max, size=(params.n_trees, budget),
                         dtype=np.uint64, endpoint=True)
    return boot, draws


def _check_inputs(X: np.ndarray, n_left: int):
    if X.ndim != 2:
        raise InputError("X must be a 2-D array of segment rows")
    m = X.shape[0]
    if m < 2:
        raise InputError(f"need at least 2 observations to fit, got {m}")
    if not (0 < n_left < m):
        raise InputError(
            f"both classes must be non-empty: n_left={n_left} with {m} rows")
    return np.ascontiguousarray(X, dtype=np.float64)


def _loo_prior(m: int, n_left: int) -> np.ndarray:
    i = np.arange(m)
    return (n_left - (i < n_left)) / (m - 1)


def fit_predict_oob(X, n_left: int, params: ForestParams,
                    rng: np.random.Generator) -> OobPrediction:
    """Fit a forest on the segment rows labelled (class 1 = first ``n_left``
    rows) and return out-of-bag class-1 probabilities.

    Deterministic given (X, n_left, params, rng state); the thread count
    never changes the result.
    """
    X = _check_inputs(X, n_left)
    m, d = X.shape
    mtry = params.resolve_mtry(d)
    boot, draws = _draw_randomness(m, d, params, mtry, rng)
    votes, voted = _forest_votes(X, n_left, boot, draws,
                                 params.resolve_depth(), mtry,
                                 params.min_leaf, True,
                                 params.aggregation == "probability")
    counts = voted.sum(axis=0, dtype=np.int64)
    ones = votes.sum(axis=0)
    probs = np.where(counts > 0, ones / np.maximum(counts, 1),
                     _loo_prior(m, n_left))
    return OobPrediction(probs=probs, oob_counts=counts)


def fit_predict_insample(X, n_left: int, params: ForestParams,
                         rng: np.random.Generator) -> np.ndarray:
    """Vote-fraction probabilities using *all* trees, in-bag ones included.

    This deliberately reproduces the overfitting failure mode that out-of-bag
    prediction exists to avoid; it is exposed for diagnostics only.
    """
    X = _check_inputs(X, n_left)
    m, d = X.shape
    mtry = params.resolve_mtry(d)
    boot, draws = _draw_randomness(m, d, params, mtry, rng)
    votes, voted = _forest_votes(X, n_left, boot, draws,
                                 params.resolve_depth(), mtry,
                                 params.min_leaf, False,
                                 params.aggregation == "probability")
    return votes.sum(axis=0) / voted.sum(axis=0, dtype=np.int64)


@dataclass(frozen=True)
class ForestDebug:
    """Raw per-tree vote/inbag matrices plus node records of the first tree,
    for instrumentation tests (OOB discipline, tree-shape invariants)."""

    votes: np.ndarray      # (n_trees, m) per-tree class-1 contributions
    voted: np.ndarray      # (n_trees, m) uint8 vote-cast flags
    inbag: np.ndarray      # (n_trees, m) bool membership in bootstrap sample
    tree_nodes: list       # dicts: depth, size, ones, is_leaf, children sizes


def fit_forest_debug(X, n_left: int, params: ForestParams,
                     rng: np.random.Generator) -> ForestDebug:
    X = _check_inputs(X, n_left)
    m, d = X.shape
    mtry = params.resolve_mtry(d)
    boot, draws = _draw_randomness(m, d, params, mtry, rng)
    depth = params.resolve_depth()
    votes, voted = _forest_votes(X, n_left, boot, draws, depth, mtry,
                                 params.min_leaf, True,
                                 params.aggregation == "probability")
    inbag = np.zeros((params.n_trees, m), dtype=bool)
    for t in range(params.n_trees):
        inbag[t, boot[t]] = True
    # rebuild tree 0 single-threadedly to expose its node records
    max_nodes = 2 * m + 2
    yb = np.zeros(m, np.int64)
    yb[:n_left] = 1
    idx = boot[0].copy()
    node_feat = np.zeros(max_nodes, np.int64)
    node_thr = np.zeros(max_nodes, np.float64)
    node_left = np.zeros(max_nodes, np.int64)
    node_right = np.zeros(max_nodes, np.int64)
    node_leaf = np.full(max_nodes, -2, np.int64)
    node_depth = np.zeros(max_nodes, np.int64)
    node_size = np.zeros(max_nodes, np.int64)
    node_ones = np.zeros(max_nodes, np.int64)
    stack = np.empty((3 * m + 4, 4), np.int64)
    tmp = np.empty(m, np.int64)
    vals = np.empty(m, np.float64)
    n_nodes = _build_tree(X, yb, idx, draws[0], depth, mtry, params.min_leaf,
                          node_feat, node_thr, node_left, node_right,
                          node_leaf, node_depth, node_size, node_ones,
                          stack, tmp, vals)
    nodes = []
    for nid in range(n_nodes):
        is_leaf = node_leaf[nid] >= 0
        nodes.append({
            "depth": int(node_depth[nid]),
            "size": int(node_size[nid]),
            "ones": int(node_ones[nid]),
            "is_leaf": bool(is_leaf),
            "left_size": None if is_leaf else int(node_size[node_left[nid]]),
            "right_size": None if is_leaf else int(node_size[node_right[nid]]),
        })
    return ForestDebug(votes=votes, voted=voted, inbag=inbag, tree_nodes=nodes)
