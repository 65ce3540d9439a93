"""Two-step split search, pseudo-permutation model selection, and the
recursive binary segmentation driver.

The search fits the classifier at the segment's quartile guesses, turns the
resulting probability predictions into per-observation log-likelihood
ratios, and maximizes the approximate gain over all guarded splits; a
second fit at that maximizer refines the estimate. Model selection permutes
the stored first-step ratios (never refitting) and compares the observed
maximal gain against the permuted maxima.

Every random stream is keyed by (seed, segment bounds), so results do not
depend on the order in which the recursion visits segments, nor on thread
scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import (DetectionConfig, InputError, SegmentBounds, Segmentation,
                   SegmentTooShortError, TimeSeriesMatrix, as_series,
                   ceil_count, make_rng_stream)
from .forest import ForestParams, fit_predict_insample, fit_predict_oob
from .knn import DEFAULT_CACHE_CAP, build_distance_cache, loo_predict
from .likelihood import (GainCurve, LikelihoodMatrix, approximate_gain_curve,
                         likelihoods_from_predictions, oob_priors)
from .meanshift import mean_binary_segmentation
from .results import DetectionResult, SplitRecord

__all__ = [
    "TwoStepResult", "PermutationTestResult",
    "two_step_search", "pseudo_permutation_test", "binary_segmentation",
    "detect", "ForestEngine", "KnnEngine", "StubPriorEngine",
    "initial_guesses", "step1_gain_table",
]

# sub-stream tags keeping engine fits and permutations on disjoint streams
_STREAM_FOREST = 1
_STREAM_PERMUTE = 2


@dataclass(frozen=True)
class TwoStepResult:
    """Output of the two-step search on one segment."""

    s_hat: int
    s1: int
    initial_guesses: tuple[int, ...]
    likelihoods: LikelihoodMatrix
    final_gain_curve: GainCurve


@dataclass(frozen=True)
class PermutationTestResult:
    g0: float
    permuted_gains: np.ndarray
    p_value: float


class ForestEngine:
    """Random-forest gain engine over a fixed series.

    Each (segment, split) fit draws from a stream keyed by
    (seed, u, v, s), making refits reproducible and order-independent.
    """

    method = "random_forest"

    def __init__(self, series, params: ForestParams | None = None,
                 seed: int = 0, in_sample: bool = False):
        self.series = as_series(series)
        self.params = params if params is not None else ForestParams()
        self.seed = int(seed)
        self.in_sample = bool(in_sample)
        self.fit_count = 0

    def split_probabilities(self, bounds: SegmentBounds, s: int) -> np.ndarray:
        self.fit_count += 1
        rows = self.series.data[bounds.u:bounds.v]
        rng = make_rng_stream(self.seed,
                              (_STREAM_FOREST, bounds.u, bounds.v, s))
        if self.in_sample:
            return fit_predict_insample(rows, s - bounds.u, self.params, rng)
        return fit_predict_oob(rows, s - bounds.u, self.params, rng).probs


class KnnEngine:
    """k-nearest-neighbor gain engine; distances are cached once."""

    method = "knn"

    def __init__(self, series, seed: int = 0, cache_cap: int = DEFAULT_CACHE_CAP):
        self.series = as_series(series)
        self.cache = build_distance_cache(self.series, cap=cache_cap)
        self.fit_count = 0

    def split_probabilities(self, bounds: SegmentBounds, s: int) -> np.ndarray:
        self.fit_count += 1
        return loo_predict(self.cache, bounds, s)


class StubPriorEngine:
    """No-signal engine: always predicts the leave-one-out prior, which
    makes every log-likelihood ratio zero. Used in tests and diagnostics."""

    method = "stub"

    def __init__(self, series=None):
        self.fit_count = 0

    def split_probabilities(self, bounds: SegmentBounds, s: int) -> np.ndarray:
        self.fit_count += 1
        return oob_priors(s, bounds)


def initial_guesses(bounds: SegmentBounds) -> tuple[int, ...]:
    """Quartile guesses of a segment, clamped strictly inside (u, v) and
    deduplicated (tiny segments can collapse the quartiles)."""
    u, v = bounds.u, bounds.v
    raw = ((3 * u + v) // 4, (u + v) // 2, (u + 3 * v) // 4)
    seen: list[int] = []
    for g in raw:
        g = min(max(g, u + 1), v - 1)
        if g not in seen:
            seen.append(g)
    return tuple(seen)


def _candidate_range(bounds: SegmentBounds, delta: float, n: int) -> tuple[int, int]:
    g = ceil_count(delta * n)
    lo, hi = bounds.u + 1 + g, bounds.v - g
    if lo > hi:
        raise SegmentTooShortError(
            f"segment ({bounds.u}, {bounds.v}] admits no split with guard {g}")
    return lo, hi


def step1_gain_table(likelihoods: LikelihoodMatrix, delta: float,
                     n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gain values for every (candidate split, guess) pair of the first step.

    Returns (candidates, values) with values of shape (S, J).
    """
    bounds = likelihoods.segment
    lo, hi = _candidate_range(bounds, delta, n)
    p = np.cumsum(likelihoods.ell, axis=0)           # (m, 2, J)
    tot2 = p[-1, 1, :]
    sel = np.arange(lo - bounds.u - 1, hi - bounds.u)
    values = p[sel, 0, :] + (tot2[None, :] - p[sel, 1, :])
    return lo + np.arange(len(sel)), values


def two_step_search(X, bounds: SegmentBounds, engine, config: DetectionConfig,
                    ) -> TwoStepResult:
    """Locate a single split of (u, v] with a constant number of fits.

    Step 1 fits the engine at the quartile guesses and takes the guarded
    argmax of the best approximate gain across guesses; step 2 refits at
    that point and returns the argmax of the refined curve. Both argmaxes
    break ties toward the smallest index.
    """
    series = as_series(X)
    n = series.n
    lo, hi = _candidate_range(bounds, config.delta, n)
    guesses = initial_guesses(bounds)
    cols1 = []
    cols2 = []
    for g in guesses:
        probs = engine.split_probabilities(bounds, g)
        e1, e2 = likelihoods_from_predictions(probs, g, bounds, config.eta)
        cols1.append(e1)
        cols2.append(e2)
    ell = np.stack([np.stack(cols1, axis=-1), np.stack(cols2, axis=-1)], axis=1)
    lik = LikelihoodMatrix(segment=bounds, guesses=guesses, ell=ell)
    _, table = step1_gain_table(lik, config.delta, n)
    s1 = lo + int(np.argmax(table.max(axis=1)))
    probs = engine.split_probabilities(bounds, s1)
    e1, e2 = likelihoods_from_predictions(probs, s1, bounds, config.eta)
    final = approximate_gain_curve(e1, e2, bounds, config.delta, n)
    return TwoStepResult(s_hat=final.argmax, s1=s1, initial_guesses=guesses,
                         likelihoods=lik, final_gain_curve=final)


def pseudo_permutation_test(likelihoods: LikelihoodMatrix,
                            config: DetectionConfig, n: int,
                            rng: np.random.Generator) -> PermutationTestResult:
    """Compare the observed step-1 maximal gain against maxima obtained
    after jointly permuting the stored ratio rows.

    One permutation per replicate is shared across both classes and all
    guesses. The observed gain itself counts as replicate zero, so the
    p-value can never fall below 1 / (permutations + 1).
    """
    bounds = likelihoods.segment
    m = bounds.length
    lo, hi = _candidate_range(bounds, config.delta, n)
    sel = np.arange(lo - bounds.u - 1, hi - bounds.u)
    ell = likelihoods.ell

    def max_gain(arr) -> np.ndarray:
        # arr: (..., m, 2, J) -> max over candidates and guesses
        p = np.cumsum(arr, axis=-3)
        tot2 = p[..., -1, 1, :]
        vals = p[..., sel, 0, :] + (tot2[..., None, :] - p[..., sel, 1, :])
        return vals.max(axis=(-2, -1))

    g0 = float(max_gain(ell))
    n_perm = config.permutations
    permuted = np.empty(n_perm)
    # keep the permuted cumsum workspace around ~32 MB
    block = max(1, int(4e6 // max(1, ell.size)))
    done = 0
    while done < n_perm:
        b = min(block, n_perm - done)
        perms = np.empty((b, m), dtype=np.intp)
        for i in range(b):
            perms[i] = rng.permutation(m)
        permuted[done:done + b] = max_gain(ell[perms])
        done += b
    exceed = int(np.sum(permuted >= g0))
    p_value = (1 + exceed) / (n_perm + 1)
    return PermutationTestResult(g0=g0, permuted_gains=permuted, p_value=p_value)


def binary_segmentation(X, engine, config: DetectionConfig) -> DetectionResult:
    """Recursively split while the pseudo-permutation test keeps accepting.

    Segments shorter than 2*delta*n (or without any guarded candidate) are
    skipped without visiting; visited segments contribute exactly four
    engine fits when the quartile guesses are distinct.
    """
    series = as_series(X)
    n = series.n
    config.min_segment(n)  # validates delta*n >= 1
    log: list[SplitRecord] = []
    found: list[int] = []

    def recurse(u: int, v: int):
        if v - u < 2.0 * config.delta * n - 1e-9:
            return
        bounds = SegmentBounds(u, v)
        try:
            _candidate_range(bounds, config.delta, n)
        except SegmentTooShortError:
            return
        step = two_step_search(series, bounds, engine, config)
        rng = make_rng_stream(config.seed, (_STREAM_PERMUTE, u, v))
        test = pseudo_permutation_test(step.likelihoods, config, n, rng)
        accepted = test.p_value <= config.threshold
        log.append(SplitRecord(
            u=u, v=v, guesses=step.initial_guesses, s1=step.s1,
            s_hat=step.s_hat, step1_max_gain=test.g0,
            best_gain=step.final_gain_curve.max_gain,
            p_value=test.p_value, accepted=accepted))
        if accepted:
            found.append(step.s_hat)
            recurse(u, step.s_hat)
            recurse(step.s_hat, v)

    recurse(0, n)
    boundaries = (0,) + tuple(sorted(found)) + (n,)
    return DetectionResult(segmentation=Segmentation(boundaries),
                           split_log=tuple(log),
                           engine_fits=getattr(engine, "fit_count", 0))


def make_engine(series: TimeSeriesMatrix, config: DetectionConfig):
    """Instantiate the engine selected by ``config.method``."""
    params = dict(config.method_params or {})
    if config.method == "random_forest":
        return ForestEngine(series, ForestParams(**params), seed=config.seed)
    if config.method == "knn":
        cap = int(params.pop("cache_cap", DEFAULT_CACHE_CAP))
        if params:
            raise InputError(f"unknown knn parameters: {sorted(params)}")
        return KnnEngine(series, seed=config.seed, cache_cap=cap)
    raise InputError(f"no classifier engine for method {config.method!r}")


def detect(X, config: DetectionConfig | None = None, **overrides) -> DetectionResult:
    """Run multiple change point detection on an n-by-d matrix.

    Keyword overrides are applied on top of ``config`` (or the defaults),
    e.g. ``detect(X, method="knn", seed=3)``.
    """
    if config is None:
        config = DetectionConfig(**overrides)
    elif overrides:
        config = replace(config, **overrides)
    series = as_series(X)
    if config.method == "change_in_mean":
        return mean_binary_segmentation(series, config)
    engine = make_engine(series, config)
    return binary_segmentation(series, engine, config)
