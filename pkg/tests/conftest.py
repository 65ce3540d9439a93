import numpy as np
import pytest

from segclass.core import make_rng_stream
from segclass.forest import ForestParams, fit_predict_oob


@pytest.fixture(scope="session")
def warm_forest():
    """Force numba compilation before any timing-sensitive test."""
    rng = make_rng_stream(0, 12345)
    X = rng.standard_normal((40, 3))
    fit_predict_oob(X, 20, ForestParams(n_trees=2), rng)
    return True
