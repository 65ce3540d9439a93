"""Classifier-based multivariate change point detection.

Detect distributional changes in a time-ordered n-by-d matrix by training
binary classifiers on candidate splits, converting their class-probability
predictions into per-observation log-likelihood ratios, and recursing with
binary segmentation. Random forest and k-nearest-neighbor engines are
provided, plus a parametric change-in-mean baseline.

    from segclass import detect
    result = detect(X, method="random_forest", seed=7)
    result.segmentation.changepoints
"""

from .core import (DetectionConfig, InputError, Segmentation, SegmentBounds,
                   SegmentTooShortError, TimeSeriesMatrix, make_rng_stream)
from .detector import (ForestEngine, KnnEngine, StubPriorEngine,
                       binary_segmentation, detect, pseudo_permutation_test,
                       two_step_search)
from .forest import ForestParams, OobPrediction, fit_predict_oob
from .knn import DistanceCache, build_distance_cache, loo_predict
from .meanshift import mean_binary_segmentation, mean_gain, mean_gain_curve
from .metrics import adjusted_rand_index, hausdorff_distances, metric_report
from .results import DetectionResult, SplitRecord
from .simgen import (LabeledSeries, ScenarioSpec, gen_cic, gen_cim,
                     gen_dataset_concat, gen_dirichlet,
                     gen_homogeneous_shuffle, gen_variable_k)

__version__ = "0.1.0"

__all__ = [
    "DetectionConfig", "InputError", "Segmentation", "SegmentBounds",
    "SegmentTooShortError", "TimeSeriesMatrix", "make_rng_stream",
    "ForestEngine", "KnnEngine", "StubPriorEngine", "binary_segmentation",
    "detect", "pseudo_permutation_test", "two_step_search",
    "ForestParams", "OobPrediction", "fit_predict_oob",
    "DistanceCache", "build_distance_cache", "loo_predict",
    "mean_binary_segmentation", "mean_gain", "mean_gain_curve",
    "adjusted_rand_index", "hausdorff_distances", "metric_report",
    "DetectionResult", "SplitRecord",
    "LabeledSeries", "ScenarioSpec", "gen_cic", "gen_cim",
    "gen_dataset_concat", "gen_dirichlet", "gen_homogeneous_shuffle",
    "gen_variable_k",
    "__version__",
]
