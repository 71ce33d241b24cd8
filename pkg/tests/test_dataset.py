import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bdrga import dataset as dset
from bdrga.exceptions import (EmptyData, MissingFile, ParseError, RatioOutOfRange,
                              SchemaError)


def _write(tmp_path, lines, name="d.csv"):
    p = tmp_path / name
    p.write_text("\n".join(lines) + "\n")
    return str(p)


def _row(i, diag="M", value="1.0"):
    return ",".join([str(i), diag] + [value] * 30)


class TestLoading:
    def test_canonical_file_shape_and_counts(self, wdbc):
        assert wdbc.features.shape == (569, 30)
        assert len(wdbc.labels) == 569
        counts = wdbc.class_counts()
        assert sorted(counts.values()) == [212, 357]
        assert counts == {"malignant": 212, "benign": 357}

    def test_header_is_skipped(self, tmp_path):
        header = ",".join(["id", "diagnosis"] + [f"f{i}" for i in range(30)])
        path = _write(tmp_path, [header, _row(1), _row(2, "B")])
        ds = dset.load_dataset(path)
        assert ds.n_rows == 2
        assert list(ds.labels) == [1, 0]

    def test_headerless_file(self, tmp_path):
        path = _write(tmp_path, [_row(1), _row(2, "B"), _row(3)])
        assert dset.load_dataset(path).n_rows == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            dset.load_wdbc_csv(str(tmp_path / "nope.csv"))

    def test_wrong_column_count(self, tmp_path):
        path = _write(tmp_path, [_row(1), "1,M,2.0"])
        with pytest.raises(SchemaError):
            dset.load_wdbc_csv(path)

    def test_bad_diagnosis_reports_position(self, tmp_path):
        path = _write(tmp_path, [_row(1), _row(2, "X")])
        with pytest.raises(ParseError) as exc:
            dset.load_wdbc_csv(path)
        assert exc.value.row == 2 and exc.value.column == 2

    def test_non_numeric_value(self, tmp_path):
        path = _write(tmp_path, [_row(1), _row(2, value="abc")])
        with pytest.raises(ParseError):
            dset.load_wdbc_csv(path)

    def test_empty_file(self, tmp_path):
        path = _write(tmp_path, [""])
        with pytest.raises(EmptyData):
            dset.load_wdbc_csv(path)

    def test_encode_keeps_shape(self, wdbc, data_path):
        records = dset.load_wdbc_csv(data_path)
        assert len(records) == wdbc.n_rows
        assert all(len(r.features) == 30 for r in records)

    def test_round_trip_write(self, tmp_path, wdbc):
        path = str(tmp_path / "rt.csv")
        dset.write_wdbc_csv(path, wdbc.features[:10], wdbc.labels[:10])
        back = dset.load_dataset(path)
        np.testing.assert_array_equal(back.features, wdbc.features[:10])
        np.testing.assert_array_equal(back.labels, wdbc.labels[:10])

    def test_arrays_are_read_only(self, wdbc):
        with pytest.raises(ValueError):
            wdbc.features[0, 0] = 1.0


class TestNormalization:
    def test_minmax_all_rows_in_unit_interval(self, wdbc):
        out = dset.normalize(wdbc, "minmax")
        assert out.features.min() >= 0.0 and out.features.max() <= 1.0

    def test_minmax_train_scope(self, wdbc):
        sp = dset.split(wdbc, 0.2, 3)
        out = dset.normalize(wdbc, "minmax", sp.train_indices)
        tr = out.features[sp.train_indices]
        assert tr.min() >= 0.0 and tr.max() <= 1.0
        assert np.all(np.isfinite(out.features[sp.test_indices]))

    def test_zscore_zero_mean(self, wdbc):
        out = dset.normalize(wdbc, "zscore")
        assert np.all(np.abs(out.features.mean(axis=0)) < 1e-9)

    def test_zscore_train_scope_zero_mean_on_fit_rows(self, wdbc):
        sp = dset.split(wdbc, 0.2, 4)
        out = dset.normalize(wdbc, "zscore", sp.train_indices)
        assert np.all(np.abs(out.features[sp.train_indices].mean(axis=0)) < 1e-9)

    def test_l2_rows_have_unit_norm(self, wdbc):
        out = dset.normalize(wdbc, "l2")
        np.testing.assert_allclose(np.linalg.norm(out.features, axis=1), 1.0, atol=1e-12)

    @pytest.mark.parametrize("mode", ["minmax", "zscore"])
    def test_constant_column_maps_to_zero(self, mode):
        X = np.column_stack([np.full(5, 7.0), np.arange(5.0)])
        ds = dset.Dataset(X, np.array([0, 1, 0, 1, 0]), ("a", "b"))
        out = dset.normalize(ds, mode)
        assert np.all(out.features[:, 0] == 0.0)

    def test_double_normalization_rejected(self, wdbc):
        with pytest.raises(ValueError):
            dset.normalize(dset.normalize(wdbc, "minmax"), "zscore")


class TestSplit:
    @given(seed=st.integers(0, 2**32 - 1), ratio=st.floats(0.01, 0.99))
    @settings(max_examples=50, deadline=None)
    def test_partition(self, wdbc, seed, ratio):
        sp = dset.split(wdbc, ratio, seed)
        both = np.concatenate([sp.train_indices, sp.test_indices])
        np.testing.assert_array_equal(np.sort(both), np.arange(wdbc.n_rows))
        assert len(sp.train_indices) == int(np.floor(wdbc.n_rows * ratio))

    def test_default_split_size(self, wdbc):
        assert len(dset.split(wdbc, 0.2, 0).train_indices) == 113

    def test_seeded(self, wdbc):
        a, b = dset.split(wdbc, 0.2, 9), dset.split(wdbc, 0.2, 9)
        np.testing.assert_array_equal(a.train_indices, b.train_indices)
        assert not np.array_equal(a.train_indices, dset.split(wdbc, 0.2, 10).train_indices)

    @pytest.mark.parametrize("ratio", [0.0, 1.0, -0.1, 1.5])
    def test_ratio_bounds(self, wdbc, ratio):
        with pytest.raises(RatioOutOfRange):
            dset.split(wdbc, ratio, 0)

    def test_select_features(self, wdbc):
        sub = wdbc.select_features([3, 0])
        assert sub.n_features == 2
        np.testing.assert_array_equal(sub.features[:, 0], wdbc.features[:, 3])
        assert sub.feature_names == (wdbc.feature_names[3], wdbc.feature_names[0])
