import numpy as np
import pytest

from segclass.core import InputError, make_rng_stream
from segclass.detector import detect
from segclass.ingest import (EncodeResult, encode_and_normalize, load_table,
                             normalize_matrix)
from segclass.simgen import gen_cim


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestLoadTable:
    def test_numeric_inference(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n3,4\n5,6\n")
        table = load_table(path)
        assert table.names == ("a", "b")
        assert table.kinds == ("numeric", "numeric")
        assert table.n_rows == 3
        assert np.allclose(table.columns[0], [1, 3, 5])

    def test_categorical_inference(self, tmp_path):
        path = write(tmp_path, "color,x\nred,1\nblue,2\n")
        table = load_table(path)
        assert table.kinds == ("categorical", "numeric")

    def test_ragged_row_names_row_index(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n3\n")
        with pytest.raises(InputError, match="row 2"):
            load_table(path)

    def test_numeric_override_error_names_position(self, tmp_path):
        path = write(tmp_path, "a,b\n1,x\n2,y\n")
        with pytest.raises(InputError, match="row 1.*'b'"):
            load_table(path, kind_overrides={"b": "numeric"})

    def test_categorical_override(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n3,4\n")
        table = load_table(path, kind_overrides={"b": "categorical"})
        assert table.kinds == ("numeric", "categorical")

    def test_missing_file(self):
        with pytest.raises(InputError, match="no/such/file.csv"):
            load_table("no/such/file.csv")

    def test_label_column(self, tmp_path):
        path = write(tmp_path, "x,cls\n1,a\n2,b\n")
        table = load_table(path, label_column="cls")
        assert table.kinds == ("numeric", "label")
        assert list(table.labels) == ["a", "b"]

    def test_non_finite_cells_are_not_numeric(self, tmp_path):
        path = write(tmp_path, "a\n1\ninf\n")
        table = load_table(path)
        assert table.kinds == ("categorical",)

    def test_alternative_delimiter(self, tmp_path):
        path = write(tmp_path, "a;b\n1;2\n")
        table = load_table(path, delimiter=";")
        assert table.names == ("a", "b")


class TestEncodeAndNormalize:
    def test_dummy_encoding_one_column_per_category(self, tmp_path):
        path = write(tmp_path, "c,x\nred,1\ngreen,2\nblue,3\nred,4\n")
        enc = encode_and_normalize(load_table(path), normalize=False)
        assert enc.columns == ("c=blue", "c=green", "c=red", "x")
        indicators = enc.matrix.data[:, :3]
        assert set(np.unique(indicators)) == {0.0, 1.0}
        assert np.allclose(indicators.sum(axis=1), 1.0)

    def test_consecutive_diff_median_scale(self):
        col = np.array([1.0, 2.0, 4.0, 7.0, 11.0])[:, None]
        scaled, scales, zero = normalize_matrix(col)
        # |diffs| = (1, 2, 3, 4), median 2.5
        assert scales[0] == pytest.approx(2.5)
        assert np.allclose(scaled[:, 0], col[:, 0] / 2.5)
        assert zero == ()

    def test_constant_column_passes_through(self, tmp_path):
        path = write(tmp_path, "a,b\n5,1\n5,2\n5,3\n")
        enc = encode_and_normalize(load_table(path))
        assert enc.zero_scale_columns == ("a",)
        assert np.allclose(enc.matrix.data[:, 0], 5.0)

    def test_mad_estimator_flag(self):
        col = np.array([1.0, 2.0, 4.0, 7.0, 11.0])[:, None]
        _, scales, _ = normalize_matrix(col, "abs_diff_mad")
        # |diffs| = (1,2,3,4); MAD = median(|diffs - 2.5|) = 1.0
        assert scales[0] == pytest.approx(1.0)

    def test_unknown_estimator(self):
        with pytest.raises(InputError):
            normalize_matrix(np.ones((3, 1)), "zscore")

    def test_normalization_idempotent_up_to_zero_scale(self):
        rng = make_rng_stream(40, 0)
        X = rng.standard_normal((50, 3)) * np.array([2.0, 0.5, 7.0])
        once, _, _ = normalize_matrix(X)
        twice, scales2, _ = normalize_matrix(once)
        assert np.allclose(scales2, 1.0, rtol=1e-12)
        assert np.allclose(twice, once, rtol=1e-12)

    def test_label_column_excluded_from_matrix(self, tmp_path):
        path = write(tmp_path, "x,y,cls\n1,2,a\n3,4,b\n5,6,a\n")
        enc = encode_and_normalize(load_table(path, label_column="cls"))
        assert enc.matrix.d == 2
        assert list(enc.labels) == ["a", "b", "a"]


def test_forest_detection_invariant_to_normalization(warm_forest):
    # per-column monotone scaling preserves every threshold ordering, so
    # identical RNG streams give identical trees and identical results
    series = gen_cim(seed=11)
    scaled, _, _ = normalize_matrix(series.X.data)
    a = detect(series.X.data, method="random_forest", seed=11)
    b = detect(scaled, method="random_forest", seed=11)
    assert a.segmentation.boundaries == b.segmentation.boundaries
    assert [r.p_value for r in a.split_log] == [r.p_value for r in b.split_log]
