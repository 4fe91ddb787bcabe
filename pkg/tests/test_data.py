import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from truncsparse.data import (Dataset, DatasetSpec, Example, as_arrays, load_dataset, max_norm,
                              normalize_to_ball, synth_dataset, write_csv, write_svmlight)


def test_svmlight_line(tmp_path):
    p = tmp_path / "a.svm"
    p.write_text("+1 1:0.5 3:-0.2\n")
    data = load_dataset(p, dim=3)
    np.testing.assert_array_equal(data.X[0], [0.5, 0.0, -0.2])
    assert data.y[0] == 1.0


def test_svmlight_comments_and_inferred_dim(tmp_path):
    p = tmp_path / "a.svm"
    p.write_text("# header\n-1 2:1.5  # trailing\n\n+1 4:2\n")
    data = load_dataset(p)
    assert data.X.shape == (2, 4)
    assert list(data.y) == [-1.0, 1.0]


def test_empty_file(tmp_path):
    p = tmp_path / "e.svm"
    p.write_text("")
    with pytest.raises(ValueError, match="no examples"):
        load_dataset(p)


@pytest.mark.parametrize("body,msg", [
    ("1 1:0.5\n1 x:2\n", ":2: parse error"),
    ("1 0:0.5\n", ":1: parse error"),
    ("1 4:0.5\n", "exceeds dimension"),
])
def test_parse_errors_carry_line_numbers(tmp_path, body, msg):
    p = tmp_path / "bad.svm"
    p.write_text(body)
    with pytest.raises(ValueError, match=msg):
        load_dataset(p, dim=3)


def test_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("y,f1,f2\n1,0.5\n")
    with pytest.raises(ValueError, match=":2:"):
        load_dataset(p, "csv", dim=2)
    with pytest.raises(ValueError, match="unknown dataset format"):
        load_dataset(p, "parquet")


@pytest.mark.parametrize("writer,fmt", [(write_svmlight, "svmlight"), (write_csv, "csv")])
def test_round_trip(tmp_path, rng, writer, fmt):
    X = rng.normal(size=(25, 7))
    X[rng.random(X.shape) < 0.3] = 0.0
    data = Dataset(X, rng.normal(size=25))
    path = tmp_path / f"d.{fmt}"
    writer(path, data)
    back = load_dataset(path, fmt, dim=7)
    np.testing.assert_allclose(back.X, X, atol=1e-15, rtol=0)
    np.testing.assert_allclose(back.y, data.y, atol=1e-15, rtol=0)


def test_as_arrays_from_examples():
    X, y = as_arrays([Example(np.array([1.0, 2.0]), 1.0), Example(np.array([0.0, 1.0]), -1.0)])
    assert X.shape == (2, 2) and list(y) == [1.0, -1.0]
    with pytest.raises(ValueError):
        as_arrays([])
    with pytest.raises(ValueError):
        as_arrays([Example(np.ones(2), 1.0), Example(np.ones(3), 1.0)])


def test_normalize_examples():
    data = normalize_to_ball(Dataset(np.array([[3.0, 4.0], [0.1, 0.0]]), np.zeros(2)), 1.0)
    np.testing.assert_allclose(data.X[0], [0.6, 0.8])
    np.testing.assert_array_equal(data.X[1], [0.1, 0.0])
    np.testing.assert_allclose(data.meta["scale_factors"], [0.2, 1.0])


@given(arrays(np.float64, (6, 5), elements=st.floats(-1e6, 1e6)), st.floats(1e-3, 1e3))
def test_normalized_rows_within_ball(X, c):
    data = normalize_to_ball(Dataset(X, np.zeros(6)), c)
    assert np.all(np.linalg.norm(data.X, axis=1) <= c)
    small = np.linalg.norm(X, axis=1) <= c
    np.testing.assert_array_equal(data.X[small], X[small])


def test_synth_support_size(rng):
    data = synth_dataset(DatasetSpec(dimension=10, rounds=30, informative_fraction=0.2), "hinge", rng)
    assert np.count_nonzero(data.meta["u_true"]) == 2
    assert set(np.unique(data.y)) <= {-1.0, 1.0}


def test_synth_noiseless_squared(rng):
    data = synth_dataset(DatasetSpec(dimension=8, rounds=40, noise=0.0), "squared", rng)
    np.testing.assert_array_equal(data.y, data.X @ data.meta["u_true"])


@pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
def test_synth_respects_c_bound(rng, c):
    data = synth_dataset(DatasetSpec(dimension=30, rounds=200, c_bound=c), "logistic", rng)
    assert max_norm(data) <= c


def test_spec_validation():
    with pytest.raises(ValueError):
        DatasetSpec(informative_fraction=0.0)
    with pytest.raises(ValueError):
        DatasetSpec(informative_fraction=1.5)
    DatasetSpec(informative_fraction=1.0)
