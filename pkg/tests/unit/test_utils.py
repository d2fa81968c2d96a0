import numpy as np
import pandas as pd
import pytest

from src.utils.errors import DatasetError
from src.utils.utils_io import read_dataset, read_json, write_json, write_matrix_csv
from src.utils.utils_stats import make_rng, newey_west_se, tau_matrix


# --- Lectura de datos ---

def test_read_dataset_keeps_dates_apart(tmp_path):
    path = tmp_path / "retornos.csv"
    pd.DataFrame({"fecha": ["2024-01-01", "2024-01-02"], "a": [0.1, -0.2], "b": [1.0, 2.0]}).to_csv(path, index=False)
    dataset = read_dataset(path)
    assert dataset.columns == ("a", "b")
    assert dataset.values.shape == (2, 2)
    assert list(dataset.dates) == ["2024-01-01", "2024-01-02"]


def test_read_dataset_reports_bad_line(tmp_path):
    path = tmp_path / "roto.csv"
    path.write_text("a,b\n0.1,0.2\n0.3,abc\n0.5,0.6\n", encoding="utf-8")
    with pytest.raises(DatasetError, match="líneas: 3"):
        read_dataset(path)


def test_read_dataset_without_numeric_columns(tmp_path):
    path = tmp_path / "fechas.csv"
    path.write_text("fecha\n2024-01-01\n", encoding="utf-8")
    with pytest.raises(DatasetError):
        read_dataset(path)


def test_read_dataset_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_dataset(tmp_path / "no_existe.csv")


def test_json_round_trip(tmp_path):
    path = write_json({"a": [1, 2], "ñ": "sí"}, tmp_path / "sub" / "x.json")
    assert read_json(path) == {"a": [1, 2], "ñ": "sí"}


def test_read_json_invalid(tmp_path):
    path = tmp_path / "roto.json"
    path.write_text("{\"a\": ", encoding="utf-8")
    with pytest.raises(DatasetError):
        read_json(path)


def test_write_matrix_csv_with_columns(tmp_path):
    path = write_matrix_csv(np.eye(2), tmp_path / "m.csv", ["x", "y"])
    df = pd.read_csv(path)
    assert list(df.columns) == ["x", "y"]
    assert df.shape == (2, 2)


# --- Estadística ---

def test_make_rng_reproducible_by_stream():
    a = make_rng(5, 1).uniform(size=4)
    b = make_rng(5, 1).uniform(size=4)
    c = make_rng(5, 2).uniform(size=4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_newey_west_without_lags_is_plain_standard_error():
    x = np.random.default_rng(0).normal(size=200)
    assert newey_west_se(x, 0) == pytest.approx(np.sqrt(np.var(x) / x.size))


def test_newey_west_grows_with_positive_autocorrelation():
    rng = np.random.default_rng(1)
    x = np.convolve(rng.normal(size=2000), np.ones(10), "valid")
    assert newey_west_se(x, 20) > 2 * newey_west_se(x, 0)


def test_newey_west_short_series():
    assert np.isnan(newey_west_se(np.array([1.0]), 3))


def test_tau_matrix_diagonal():
    x = np.random.default_rng(2).normal(size=(100, 3))
    np.testing.assert_allclose(np.diag(tau_matrix(x)), 1.0)
