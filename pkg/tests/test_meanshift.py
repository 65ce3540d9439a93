import numpy as np
import pytest

from segclass.core import DetectionConfig, SegmentBounds, make_rng_stream
from segclass.meanshift import (GAMMA_COEFFICIENT, gamma_threshold, mean_gain,
                                mean_gain_curve, mean_binary_segmentation)
from segclass.simgen import gen_cic, gen_cim


def direct_likelihood_gain(X, u, v, s):
    """Oracle: difference of maximized unit-variance Gaussian log-likelihoods,
    0.5*(sum (x-m)^2 - sum_left (x-m_l)^2 - sum_right (x-m_r)^2)."""
    seg = X[u:v]
    left, right = X[u:s], X[s:v]
    sq = lambda block: ((block - block.mean(axis=0)) ** 2).sum()
    return 0.5 * (sq(seg) - sq(left) - sq(right))


class TestMeanGain:
    def test_constant_series_is_zero(self):
        X = np.full((30, 3), 2.5)
        for s in range(1, 30):
            assert mean_gain(X, SegmentBounds(0, 30), s) == pytest.approx(0.0)

    def test_step_series_hand_value(self):
        X = np.array([0, 0, 0, 1, 1, 1], dtype=float)[:, None]
        assert mean_gain(X, SegmentBounds(0, 6), 3) == pytest.approx(0.75)
        assert direct_likelihood_gain(X, 0, 6, 3) == pytest.approx(0.75)

    def test_boundary_split_matches_oracle(self):
        rng = make_rng_stream(31, 0)
        X = rng.standard_normal((12, 2))
        # first point near (but not exactly at) the mean of the rest gives a
        # small positive gain; exactly at the mean the gain vanishes
        X[0] = X[1:].mean(axis=0) + 0.01
        got = mean_gain(X, SegmentBounds(0, 12), 1)
        want = direct_likelihood_gain(X, 0, 12, 1)
        assert got == pytest.approx(want, rel=1e-9)
        assert 0.0 < got < 0.01
        X[0] = X[1:].mean(axis=0)
        assert mean_gain(X, SegmentBounds(0, 12), 1) == pytest.approx(0.0, abs=1e-12)

    def test_matches_oracle_on_random_inputs(self):
        rng = make_rng_stream(31, 1)
        for _ in range(200):
            n = int(rng.integers(4, 40))
            d = int(rng.integers(1, 5))
            X = rng.normal(size=(n, d)) * 3 + rng.normal(size=d)
            u = int(rng.integers(0, n - 2))
            v = int(rng.integers(u + 2, n + 1))
            s = int(rng.integers(u + 1, v))
            got = mean_gain(X, SegmentBounds(u, v), s)
            want = direct_likelihood_gain(X, u, v, s)
            assert got == pytest.approx(want, rel=1e-9, abs=1e-9)

    def test_translation_invariance(self):
        rng = make_rng_stream(31, 2)
        X = rng.standard_normal((25, 3))
        shift = np.array([5.0, -2.0, 100.0])
        b = SegmentBounds(0, 25)
        for s in (5, 12, 20):
            assert mean_gain(X + shift, b, s) == pytest.approx(
                mean_gain(X, b, s), rel=1e-9)

    def test_cusum_identity(self):
        # 2 * gain / (v - u) equals the squared mean-normalized CUSUM
        rng = make_rng_stream(31, 3)
        X = rng.standard_normal((40, 2))
        u, v = 3, 37
        for s in range(u + 1, v):
            left = X[u:s].sum(axis=0)
            right = X[s:v].sum(axis=0)
            cusum = (np.sqrt((v - s) / ((v - u) * (s - u))) * left
                     - np.sqrt((s - u) / ((v - u) * (v - s))) * right
                     ) / np.sqrt(v - u)
            got = 2.0 * mean_gain(X, SegmentBounds(u, v), s) / (v - u)
            assert got == pytest.approx(float(cusum @ cusum), rel=1e-9)


class TestMeanGainCurve:
    def test_prefix_curve_matches_pointwise(self):
        rng = make_rng_stream(32, 0)
        X = rng.standard_normal((60, 3))
        curve = mean_gain_curve(X, SegmentBounds(0, 60), 0.05, 60)
        for s, value in zip(curve.candidates, curve.values):
            assert value == pytest.approx(
                mean_gain(X, SegmentBounds(0, 60), int(s)), rel=1e-9, abs=1e-12)
        assert np.all(curve.values >= 0.0)

    def test_argmax_at_true_shift(self):
        X = np.zeros((50, 1))
        X[30:] = 4.0
        curve = mean_gain_curve(X, SegmentBounds(0, 50), 0.05, 50)
        assert curve.argmax == 30


class TestMeanBinarySegmentation:
    def test_cim_localizes_both_change_points(self):
        good = 0
        for seed in range(100):
            series = gen_cim(seed)
            result = mean_binary_segmentation(
                series.X, DetectionConfig(method="change_in_mean"))
            cps = result.segmentation.changepoints
            if len(cps) == 2 and abs(cps[0] - 200) <= 5 and abs(cps[1] - 400) <= 5:
                good += 1
        assert good >= 95

    def test_cic_detects_nothing(self):
        zero = 0
        for seed in range(100):
            series = gen_cic(seed)
            result = mean_binary_segmentation(
                series.X, DetectionConfig(method="change_in_mean"))
            zero += not result.segmentation.changepoints
        assert zero >= 95

    def test_homogeneous_false_positive_rate(self):
        fired = 0
        for seed in range(100):
            X = make_rng_stream(seed, 777).standard_normal((600, 5))
            result = mean_binary_segmentation(
                X, DetectionConfig(method="change_in_mean"))
            fired += bool(result.segmentation.changepoints)
        assert fired <= 5

    def test_threshold_shape(self):
        assert gamma_threshold(600, 5) == pytest.approx(
            GAMMA_COEFFICIENT * 5 * np.log(600))

    def test_split_log_records(self):
        X = np.zeros((100, 1))
        X[60:] = 5.0
        result = mean_binary_segmentation(
            X, DetectionConfig(method="change_in_mean", delta=0.05))
        assert result.segmentation.changepoints == (60,)
        root = result.split_log[0]
        assert root.accepted and root.p_value is None and root.s_hat == 60
        for record in result.split_log:
            if record.accepted:
                g = 5  # ceil(0.05 * 100)
                assert record.s_hat - record.u >= g
                assert record.v - record.s_hat >= g
