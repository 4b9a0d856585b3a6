import logging

import numpy as np
import pytest

from svmcoreset.data import (
    Hyperplane,
    LabeledPoint,
    WeightedDataset,
    embed_bias,
    export_csv,
    iter_csv_chunks,
    load_csv,
    fit_scaler,
    running_moments,
    running_scaler,
    split_by_label,
    standardize,
)


def test_embed_bias_vector_and_matrix():
    assert embed_bias([2.0, 3.0]).tolist() == [2.0, 3.0, 1.0]
    assert embed_bias(np.zeros((2, 3)))[:, -1].tolist() == [1.0, 1.0]


def test_embed_bias_names_the_bad_entry():
    with pytest.raises(ValueError, match=r"\(1, 0\)"):
        embed_bias([[0.0, 1.0], [np.nan, 2.0]])


def test_standardize_leaves_constant_columns_centered():
    z, mean, std = standardize([[1.0, 5.0], [3.0, 5.0]])

    assert z[:, 0].tolist() == [-1.0, 1.0]
    assert z[:, 1].tolist() == [0.0, 0.0]
    assert mean.tolist() == [2.0, 5.0]
    assert std.tolist() == [1.0, 0.0]


def test_labeled_point_validation():
    with pytest.raises(ValueError):
        LabeledPoint(0, [1.0, 2.0], 1)

    with pytest.raises(ValueError):
        LabeledPoint(0, [1.0, 1.0], 0)

    with pytest.raises(ValueError):
        LabeledPoint(0, [1.0, 1.0], 1, u=-1.0)

    assert LabeledPoint(3, [0.5, 1.0], -1).d == 1


def test_hyperplane_is_read_only():
    h = Hyperplane([1.0, 2.0, 3.0])

    assert h.normal.tolist() == [1.0, 2.0]
    assert h.bias == 3.0

    with pytest.raises(ValueError):
        h.w[0] = 5.0


def test_dataset_rejects_bad_inputs():
    with pytest.raises(ValueError, match="not embedded"):
        WeightedDataset([[1.0, 2.0]], [1])

    with pytest.raises(ValueError, match="label"):
        WeightedDataset([[1.0, 1.0]], [2])

    with pytest.raises(ValueError, match="non negative"):
        WeightedDataset([[1.0, 1.0]], [1], [-0.5])

    with pytest.raises(ValueError, match="rows"):
        WeightedDataset([[1.0, 1.0], [2.0, 1.0]], [1])


def test_dataset_arrays_are_frozen(tiny):
    with pytest.raises(ValueError):
        tiny.X[0, 0] = 10.0

    with pytest.raises(ValueError):
        tiny.u[0] = 10.0


def test_dataset_totals_and_signed_vectors(tiny):
    assert tiny.n == 6
    assert tiny.d == 2
    assert tiny.U == pytest.approx(9.0)
    assert np.array_equal(tiny.signed[3], -tiny.X[3])
    assert tiny[1].u == 2.0


def test_subset_keeps_origin_ids(tiny):
    sub = tiny.subset([4, 1], u=[7.0, 8.0])

    assert sub.ids.tolist() == [4, 1]
    assert sub.u.tolist() == [7.0, 8.0]
    assert np.array_equal(sub.X[0], tiny.X[4])


def test_concat_carries_weights(tiny):
    a, b = tiny.subset([0, 1]), tiny.subset([3, 4, 5])
    union = WeightedDataset.concat([a, b])

    assert union.U == pytest.approx(a.U + b.U)
    assert union.ids.tolist() == [0, 1, 3, 4, 5]


def test_split_by_label_warns_on_single_label(tiny, caplog):
    single = tiny.subset([0, 1, 2])

    with caplog.at_level(logging.WARNING):
        plus, minus = split_by_label(single)

    assert plus.tolist() == [0, 1, 2]
    assert minus.size == 0
    assert "Single label" in caplog.text


def test_from_raw_records_standardization():
    ds = WeightedDataset.from_raw([[1.0], [3.0]], [1, -1], standardized=True)

    assert ds.X[:, 0].tolist() == [-1.0, 1.0]
    assert ds.metadata["standardization"]["mean"] == [2.0]
    assert ds.metadata["standardization"]["scale"] == [1.0]


def test_standardize_agrees_with_the_fitted_scaler():
    raw = np.random.default_rng(2).normal(5.0, 3.0, size=(50, 2))
    scaler = fit_scaler(raw)
    z, mean, std = standardize(raw)

    assert np.allclose(z, scaler.transform(raw))
    assert np.allclose(mean, raw.mean(axis=0))
    assert np.allclose(std, raw.std(axis=0))
    assert np.allclose(scaler.scale_, std)


# ========================================================= #


def test_load_csv_with_header_and_named_label(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("a,b,label\n1,2,1\n3,4,0\n5,6,+1\n")

    ds = load_csv(path, label_column="label", header=True, standardized=False)

    assert ds.y.tolist() == [1, -1, 1]
    assert ds.X[:, :-1].tolist() == [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]
    assert ds.metadata["features"] == ["a", "b"]


@pytest.mark.parametrize(
    "content, message",
    [
        ("1,2,1\n3,x,1\n", "Row 2, column 1: cannot parse"),
        ("1,,1\n", "Row 1, column 1: missing value"),
        ("1,2,1\n1,2,7\n", "Row 2, column 2: unknown label token"),
    ],
)
def test_load_csv_reports_row_and_column(tmp_path, content, message):
    path = tmp_path / "bad.csv"
    path.write_text(content)

    with pytest.raises(ValueError, match=message):
        load_csv(path, standardized=False)


def test_export_then_load_keeps_points(tmp_path, tiny):
    path = tmp_path / "tiny.csv"
    export_csv(tiny, path)

    back = load_csv(path, label_column=-2, weight_column=-1, standardized=False)

    assert np.array_equal(back.X, tiny.X)
    assert np.array_equal(back.y, tiny.y)
    assert np.array_equal(back.u, tiny.u)


def test_iter_csv_chunks_numbers_points_by_stream_position(tmp_path):
    path = tmp_path / "stream.csv"
    path.write_text("".join(f"{i},{i * 2},{1 if i % 2 else -1}\n" for i in range(5)))

    chunks = list(iter_csv_chunks(path, 2))

    assert [c.ids.tolist() for c in chunks] == [[0, 1], [2, 3], [4]]
    assert chunks[2].X[0, :-1].tolist() == [4.0, 8.0]


def test_running_moments_match_one_shot_standardization(tmp_path):
    rng = np.random.default_rng(0)
    raw = rng.normal(3.0, 2.0, size=(37, 3))
    labels = np.where(rng.random(37) < 0.5, 1, -1)
    path = tmp_path / "moments.csv"
    export_csv(WeightedDataset(embed_bias(raw), labels), path)

    n, mean, std = running_moments(path, chunk_rows=5)
    _, expected_mean, expected_std = standardize(raw)

    assert n == 37
    assert np.allclose(mean, expected_mean, atol=1e-12)
    assert np.allclose(std, expected_std, atol=1e-12)


def test_streamed_chunks_match_a_standardized_load(tmp_path):
    rng = np.random.default_rng(4)
    raw = rng.normal(-1.0, 4.0, size=(23, 2))
    labels = np.where(rng.random(23) < 0.5, 1, -1)
    path = tmp_path / "stream.csv"
    export_csv(WeightedDataset(embed_bias(raw), labels), path)

    scaler = running_scaler(path, chunk_rows=4)
    chunks = list(iter_csv_chunks(path, 4, moments=scaler))
    whole = load_csv(path)

    assert scaler.n_samples_seen_ == 23
    assert np.allclose(np.vstack([c.X for c in chunks]), whole.X)
    assert np.allclose(whole.metadata["standardization"]["scale"], scaler.scale_)
