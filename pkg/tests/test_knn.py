import numpy as np
import pytest

from segclass.core import InputError, SegmentBounds, make_rng_stream
from segclass.knn import build_distance_cache, loo_predict


class TestDistanceCache:
    def test_identical_rows_have_zero_distance(self):
        X = np.array([[1.0, 2.0], [1.0, 2.0], [3.0, 4.0]])
        cache = build_distance_cache(X)
        assert cache.distances[0, 1] == 0.0

    def test_three_four_five(self):
        X = np.array([[0.0, 0.0], [3.0, 4.0]])
        cache = build_distance_cache(X)
        assert cache.distances[0, 1] == pytest.approx(5.0)

    def test_matches_bruteforce_exactly(self):
        rng = make_rng_stream(21, 0)
        X = rng.standard_normal((10, 3))
        cache = build_distance_cache(X)
        for i in range(10):
            for j in range(10):
                want = np.sqrt(sum((X[i, k] - X[j, k]) ** 2 for k in range(3)))
                assert cache.distances[i, j] == want

    def test_symmetry_and_diagonal(self):
        rng = make_rng_stream(21, 1)
        X = rng.standard_normal((25, 4))
        D = build_distance_cache(X).distances
        assert np.array_equal(D, D.T)
        assert np.all(np.diag(D) == 0.0)

    def test_memory_guard(self):
        with pytest.raises(InputError):
            build_distance_cache(np.zeros((11, 1)), cap=10)


class TestLooPredict:
    def test_two_separated_clusters(self):
        # nearest neighbor of each point is a same-cluster point
        X = np.array([[0.0], [0.0], [0.0], [10.0], [10.0], [10.0]])
        cache = build_distance_cache(X)
        probs = loo_predict(cache, SegmentBounds(0, 6), 3)
        assert np.allclose(probs, [1, 1, 1, 0, 0, 0])

    def test_identical_points_recover_prior(self):
        # no geometric information: the tie rule reproduces the LOO prior
        X = np.zeros((12, 2))
        cache = build_distance_cache(X)
        s = 6
        probs = loo_predict(cache, SegmentBounds(0, 12), s)
        i = np.arange(1, 13)
        prior = (s - (i <= s)) / 11
        assert np.allclose(probs, prior)

    def test_two_point_segment_forces_cross_prediction(self):
        X = np.array([[0.0], [1.0]])
        cache = build_distance_cache(X)
        probs = loo_predict(cache, SegmentBounds(0, 2), 1)
        assert np.allclose(probs, [0.0, 1.0])

    def test_loo_never_counts_self(self):
        # with self-counting the outlier's k=2 neighborhood would be
        # {itself, 0.2} (both class 2, prob 0); leave-one-out gives
        # {0.2, 0.1}, one from each class
        X = np.array([[0.0], [0.1], [0.2], [100.0]])
        cache = build_distance_cache(X)
        probs = loo_predict(cache, SegmentBounds(0, 4), 2)
        assert probs[3] == pytest.approx(0.5)

    def test_common_rescaling_leaves_predictions_unchanged(self):
        rng = make_rng_stream(22, 0)
        X = rng.standard_normal((40, 3))
        bounds = SegmentBounds(5, 35)
        base = loo_predict(build_distance_cache(X), bounds, 20)
        for c in (4.0, 0.25, 3.0):
            scaled = loo_predict(build_distance_cache(X * c), bounds, 20)
            assert np.allclose(scaled, base, atol=0, rtol=0)

    def test_neighborhood_size_tracks_segment_length(self):
        # k = floor(sqrt(m)) per segment: with 9 points, k=3; the 4th
        # nearest point must not influence the estimate
        X = np.array([[0.0], [1.0], [2.0], [50.0], [51.0], [52.0],
                      [53.0], [54.0], [100.0]])
        cache = build_distance_cache(X)
        probs = loo_predict(cache, SegmentBounds(0, 9), 3)
        # point 9 (value 100): 3 nearest are 54, 53, 52 -> all class 2
        assert probs[8] == 0.0
        # subsegment (3, 9] has m=6, k=2
        probs_sub = loo_predict(cache, SegmentBounds(3, 9), 6)
        assert probs_sub.shape == (6,)

    def test_bounds_validation(self):
        cache = build_distance_cache(np.zeros((5, 1)))
        with pytest.raises(InputError):
            loo_predict(cache, SegmentBounds(0, 5), 0)
        with pytest.raises(InputError):
            loo_predict(cache, SegmentBounds(3, 4), 3)
