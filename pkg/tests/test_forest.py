import numpy as np
import pytest

from segclass.core import InputError, make_rng_stream
from segclass.forest import (ForestParams, fit_forest_debug, fit_predict_insample,
                             fit_predict_oob)


def _rng(tag=0):
    return make_rng_stream(42, tag)


class TestForestParams:
    def test_defaults(self):
        p = ForestParams()
        assert (p.n_trees, p.max_depth, p.min_leaf) == (100, 8, 1)
        assert p.resolve_mtry(5) == 2      # floor(sqrt(5))
        assert p.resolve_mtry(1) == 1

    def test_mtry_bounds(self):
        with pytest.raises(InputError):
            ForestParams(mtry=4).resolve_mtry(3)
        with pytest.raises(InputError):
            ForestParams(n_trees=0)
        with pytest.raises(InputError):
            ForestParams(aggregation="median")

    def test_unlimited_depth(self):
        assert ForestParams(max_depth=None).resolve_depth() > 10**6


class TestInputChecks:
    def test_one_class_empty(self):
        X = _rng().standard_normal((10, 2))
        with pytest.raises(InputError):
            fit_predict_oob(X, 0, ForestParams(), _rng())
        with pytest.raises(InputError):
            fit_predict_oob(X, 10, ForestParams(), _rng())

    def test_too_few_rows(self):
        with pytest.raises(InputError):
            fit_predict_oob(np.zeros((1, 2)), 1, ForestParams(), _rng())


class TestPredictionQuality:
    def test_separated_gaussians_recover_labels(self):
        # oracle: the Bayes rule for N(0,1) vs N(10,1) is near-perfect, so
        # OOB probabilities should sit close to the 1/0 labels
        rng = _rng(1)
        X = np.concatenate([rng.standard_normal((500, 1)),
                            rng.standard_normal((500, 1)) + 10.0])
        pred = fit_predict_oob(X, 500, ForestParams(), _rng(2))
        labels = (np.arange(1000) < 500).astype(float)
        assert np.mean(np.abs(pred.probs - labels)) < 0.1

    def test_no_signal_predictions_near_prior(self):
        # 20 seeded repetitions; average prediction must track the prior
        devs = []
        for rep in range(20):
            rng = make_rng_stream(100 + rep, 0)
            X = rng.standard_normal((80, 3))
            pred = fit_predict_oob(X, 40, ForestParams(n_trees=50),
                                   make_rng_stream(100 + rep, 1))
            devs.append(pred.probs.mean() - 0.5)
        assert abs(np.mean(devs)) < 0.1

    def test_single_tree_has_unvoted_rows_with_prior_fallback(self):
        rng = _rng(3)
        X = rng.standard_normal((50, 2))
        pred = fit_predict_oob(X, 25, ForestParams(n_trees=1), _rng(4))
        uncovered = pred.oob_counts == 0
        assert uncovered.any()          # one bootstrap leaves ~63% in-bag
        i = np.flatnonzero(uncovered)
        prior = (25 - (i < 25)) / 49
        assert np.allclose(pred.probs[uncovered], prior)


class TestDeterminism:
    def test_identical_inputs_identical_probs(self):
        rng = _rng(5)
        X = rng.standard_normal((120, 4))
        a = fit_predict_oob(X, 60, ForestParams(), make_rng_stream(9, 1))
        b = fit_predict_oob(X, 60, ForestParams(), make_rng_stream(9, 1))
        assert np.array_equal(a.probs, b.probs)
        assert np.array_equal(a.oob_counts, b.oob_counts)

    def test_thread_count_does_not_change_results(self):
        import numba
        rng = _rng(6)
        X = rng.standard_normal((150, 4))
        before = numba.get_num_threads()
        try:
            numba.set_num_threads(1)
            a = fit_predict_oob(X, 70, ForestParams(), make_rng_stream(10, 1))
            numba.set_num_threads(2)
            b = fit_predict_oob(X, 70, ForestParams(), make_rng_stream(10, 1))
        finally:
            numba.set_num_threads(before)
        assert np.array_equal(a.probs, b.probs)


class TestOobDiscipline:
    def test_no_tree_votes_on_its_inbag_rows(self):
        rng = _rng(7)
        X = rng.standard_normal((90, 3))
        debug = fit_forest_debug(X, 45, ForestParams(n_trees=30),
                                 make_rng_stream(11, 1))
        assert not np.any(debug.voted.astype(bool) & debug.inbag)
        # and every cast vote is on an out-of-bag row
        assert np.all(debug.voted.astype(bool) <= ~debug.inbag)


class TestTreeShape:
    @pytest.mark.parametrize("max_depth,min_leaf", [(8, 1), (3, 5), (None, 1)])
    def test_structural_invariants(self, max_depth, min_leaf):
        rng = _rng(8)
        X = rng.standard_normal((120, 4))
        params = ForestParams(n_trees=5, max_depth=max_depth, min_leaf=min_leaf)
        debug = fit_forest_debug(X, 50, params, make_rng_stream(12, 1))
        depth_cap = params.resolve_depth()
        for node in debug.tree_nodes:
            if node["is_leaf"]:
                pure = node["ones"] in (0, node["size"])
                assert (pure or node["depth"] >= depth_cap
                        or node["size"] < 2 * min_leaf)
            else:
                assert node["left_size"] + node["right_size"] == node["size"]
                assert node["left_size"] >= min_leaf
                assert node["right_size"] >= min_leaf
                assert node["left_size"] < node["size"]   # strict reduction
                assert node["depth"] < depth_cap


class TestInSampleBias:
    def test_insample_probs_overfit_labels(self):
        rng = _rng(9)
        X = rng.standard_normal((100, 3))   # pure noise
        probs = fit_predict_insample(X, 50, ForestParams(), make_rng_stream(13, 1))
        labels = (np.arange(100) < 50).astype(float)
        # in-sample predictions memorize labels even without signal
        assert np.mean(np.abs(probs - labels)) < 0.3
        oob = fit_predict_oob(X, 50, ForestParams(), make_rng_stream(13, 1))
        assert np.mean(np.abs(oob.probs - labels)) > np.mean(np.abs(probs - labels))
