import mpmath
import numpy as np
import pytest

from segclass.core import (DEFAULT_ETA, InputError, SegmentBounds,
                           SegmentTooShortError, make_rng_stream)
from segclass.likelihood import (approximate_gain_curve, likelihoods_from_predictions,
                                 log_eta, oob_prior, oob_priors)

ETA = DEFAULT_ETA


class TestLogEta:
    def test_at_one(self):
        assert log_eta(1.0, ETA) == pytest.approx(0.0, abs=1e-15)

    def test_at_zero_is_minus_six(self):
        assert log_eta(0.0, ETA) == pytest.approx(-6.0, abs=1e-12)

    def test_half_matches_extended_precision(self):
        # oracle: evaluate log((1-eta)*x + eta) with 50-digit arithmetic
        with mpmath.workdps(50):
            eta = mpmath.exp(-6)
            expected = float(mpmath.log((1 - eta) * mpmath.mpf("0.5") + eta))
        assert log_eta(0.5, ETA) == pytest.approx(expected, rel=1e-14)

    def test_monotone(self):
        x = np.linspace(0.0, 1.0, 101)
        values = log_eta(x, ETA)
        assert np.all(np.diff(values) > 0)


class TestOobPrior:
    def test_printed_formula_left(self):
        assert oob_prior(1, 2, SegmentBounds(0, 4)) == pytest.approx(1 / 3)

    def test_printed_formula_right(self):
        assert oob_prior(3, 2, SegmentBounds(0, 4)) == pytest.approx(2 / 3)

    def test_single_left_observation(self):
        assert oob_prior(1, 1, SegmentBounds(0, 2)) == 0.0

    def test_degenerate_segment_rejected(self):
        with pytest.raises(InputError):
            oob_prior(1, 1, SegmentBounds(0, 1))

    def test_vectorized_matches_scalar(self):
        b = SegmentBounds(3, 12)
        vec = oob_priors(7, b)
        scal = [oob_prior(i, 7, b) for i in range(4, 13)]
        assert np.allclose(vec, scal, rtol=0, atol=0)


class TestLikelihoodsFromPredictions:
    def test_prediction_equal_to_prior_gives_zero(self):
        b = SegmentBounds(0, 10)
        pi = oob_priors(4, b)
        e1, e2 = likelihoods_from_predictions(pi, 4, b, ETA)
        assert np.allclose(e1, 0.0, atol=1e-12)
        assert np.allclose(e2, 0.0, atol=1e-12)

    def test_hard_predictions(self):
        # pred = 1 left of s, 0 right of it: the correct-class ratio hits
        # 1/prior and the wrong-class ratio hits the log(eta) floor
        b = SegmentBounds(0, 4)
        pred = np.array([1.0, 1.0, 0.0, 0.0])
        e1, e2 = likelihoods_from_predictions(pred, 2, b, ETA)
        pi = oob_priors(2, b)
        assert e1[0] == pytest.approx(float(np.log((1 - ETA) / pi[0] + ETA)))
        assert e2[0] == pytest.approx(-6.0, abs=1e-12)
        assert e1[2] == pytest.approx(-6.0, abs=1e-12)

    def test_zero_prior_contributes_zero(self):
        b = SegmentBounds(0, 2)
        e1, e2 = likelihoods_from_predictions(np.array([0.7, 0.3]), 1, b, ETA)
        # i=1: pi=0 -> class-1 ratio undefined -> 0
        assert e1[0] == pytest.approx(0.0, abs=1e-15)
        # i=2: 1-pi=0 -> class-2 ratio undefined -> 0
        assert e2[1] == pytest.approx(0.0, abs=1e-15)

    def test_rejects_out_of_range_predictions(self):
        b = SegmentBounds(0, 4)
        with pytest.raises(InputError):
            likelihoods_from_predictions(np.array([0.1, 1.2, 0.0, 0.0]), 2, b, ETA)

    def test_entry_bounds(self):
        rng = make_rng_stream(1, 0)
        b = SegmentBounds(0, 50)
        s = 20
        pred = rng.random(50)
        e1, e2 = likelihoods_from_predictions(pred, s, b, ETA)
        min_count = min(s, 50 - s)
        cap = np.log((1 - ETA) * (49 / (min_count - 1)) + ETA)
        for e in (e1, e2):
            assert np.all(e >= np.log(ETA) - 1e-12)
            assert np.all(e <= cap + 1e-12)
            assert np.all(np.isfinite(e))


class TestApproximateGainCurve:
    def test_kink_at_constructed_change_point(self):
        m, a0 = 40, 17
        ell1 = np.where(np.arange(1, m + 1) <= a0, 1.0, -1.0)
        curve = approximate_gain_curve(ell1, -ell1, SegmentBounds(0, m), 0.0, m)
        assert curve.argmax == a0
        assert curve.max_gain == pytest.approx(m)

    def test_flat_curve_tie_breaks_to_first_candidate(self):
        m = 30
        zeros = np.zeros(m)
        curve = approximate_gain_curve(zeros, zeros, SegmentBounds(0, m), 0.1, m)
        assert np.all(curve.values == 0.0)
        assert curve.argmax == curve.first_candidate

    def test_candidate_range_matches_guards(self):
        # n=100, delta=0.1 -> s in {11, ..., 90}
        m = 100
        rng = make_rng_stream(0, 5)
        curve = approximate_gain_curve(rng.random(m), rng.random(m),
                                       SegmentBounds(0, 100), 0.1, 100)
        assert curve.first_candidate == 11
        assert curve.candidates[-1] == 90

    def test_empty_candidate_range(self):
        with pytest.raises(SegmentTooShortError):
            approximate_gain_curve(np.zeros(4), np.zeros(4),
                                   SegmentBounds(0, 4), 0.1, 100)

    def test_matches_naive_double_sum(self):
        rng = make_rng_stream(3, 1)
        for _ in range(50):
            u = int(rng.integers(0, 5))
            m = int(rng.integers(8, 40))
            ell1 = rng.normal(size=m)
            ell2 = rng.normal(size=m)
            bounds = SegmentBounds(u, u + m)
            curve = approximate_gain_curve(ell1, ell2, bounds, 0.02, m + u)
            for s, got in zip(curve.candidates, curve.values):
                want = ell1[:s - u].sum() + ell2[s - u:].sum()
                assert got == pytest.approx(want, rel=1e-12, abs=1e-12)

    def test_telescoping_identity(self):
        rng = make_rng_stream(4, 2)
        m = 60
        ell1 = rng.normal(size=m)
        ell2 = rng.normal(size=m)
        curve = approximate_gain_curve(ell1, ell2, SegmentBounds(0, m), 0.02, m)
        diffs = np.diff(curve.values)
        idx = curve.candidates[1:] - 1  # 0-based observation index of s
        assert np.allclose(diffs, ell1[idx] - ell2[idx], rtol=1e-12, atol=1e-12)

    def test_joint_permutation_leaves_flat_case_flat(self):
        rng = make_rng_stream(5, 3)
        m = 25
        perm = rng.permutation(m)
        zeros = np.zeros(m)
        base = approximate_gain_curve(zeros, zeros, SegmentBounds(0, m), 0.04, m)
        shuffled = approximate_gain_curve(zeros[perm], zeros[perm],
                                          SegmentBounds(0, m), 0.04, m)
        assert np.array_equal(base.values, shuffled.values)
