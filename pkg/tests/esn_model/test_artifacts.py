import json
import os

import numpy as np
import pandas as pd
import pytest

from spikeesn import __version__
from spikeesn.esn import artifacts
from spikeesn.esn.errors import DataError
from spikeesn.esn.pipeline import forecast, train
from spikeesn.esn.reservoir import StateMatrix
from spikeesn.esn.timeseries import Series, load_csv


def test_save_and_load_model(tmp_path, small_config, sine_series):
    """Test the container restores a model that forecasts identically"""
    model = train(small_config, sine_series, seed=8)
    path = tmp_path / "model.npz"
    artifacts.save_model(model, str(path))
    restored = artifacts.load_model(str(path))

    assert restored.config == model.config
    assert restored.norm == model.norm
    assert restored.seed == 8
    assert restored.state_mean == model.state_mean
    assert np.array_equal(restored.weights.w_res, model.weights.w_res)
    assert sorted(restored.readouts) == sorted(model.readouts)
    original = forecast(model, sine_series, seed=8)
    again = forecast(restored, sine_series, seed=8)
    for step in model.readouts:
        assert np.array_equal(original[step], again[step])

    with np.load(path) as archive:
        meta = json.loads(str(archive["meta"]))
    assert meta["format_version"] == 1
    assert meta["version"] == __version__
    assert meta["steps"] == [1, 2]


def test_load_model_errors(tmp_path):
    """Test missing files, foreign archives and other container versions"""
    with pytest.raises(DataError, match="not found"):
        artifacts.load_model(str(tmp_path / "missing.npz"))

    foreign = tmp_path / "foreign.npz"
    np.savez(foreign, a=np.zeros(2))
    with pytest.raises(DataError, match="not a model container"):
        artifacts.load_model(str(foreign))

    text = tmp_path / "model.txt"
    text.write_text("not an archive\n", encoding="utf-8")
    with pytest.raises(DataError, match="not a model container"):
        artifacts.load_model(str(text))

    future = tmp_path / "future.npz"
    np.savez(future, meta=np.array(json.dumps({"format_version": 99})))
    with pytest.raises(DataError, match="container version"):
        artifacts.load_model(str(future))


def test_write_csv_provenance(tmp_path):
    """Test the comment header and that load_csv reads the table back"""
    path = tmp_path / "out" / "series.csv"
    series = Series([0.5, 1.5, 2.5], name="value")
    header = artifacts.provenance("gen-data", 3, kind="sine_mix")
    artifacts.write_csv(artifacts.series_frame(series), str(path), header)

    provenance = artifacts.read_provenance(str(path))
    assert provenance["command"] == "gen-data"
    assert provenance["seed"] == 3
    assert provenance["kind"] == "sine_mix"
    assert provenance["package"] == "spikeesn"
    assert np.array_equal(load_csv(path, "value").values, series.values)
    # no temporary files left behind
    assert os.listdir(path.parent) == ["series.csv"]


def test_read_provenance_plain_csv(tmp_path):
    """Test a file without a header comment"""
    path = tmp_path / "plain.csv"
    path.write_text("a\n1\n", encoding="utf-8")
    assert artifacts.read_provenance(str(path)) is None


def test_atomic_path_keeps_old_file_on_failure(tmp_path):
    """Test a failed write leaves the previous artifact untouched"""
    path = tmp_path / "report.json"
    artifacts.write_json({"a": 1}, str(path))
    with pytest.raises(RuntimeError):
        with artifacts.atomic_path(str(path)) as temporary:
            with open(temporary, "w", encoding="utf-8") as stream:
                stream.write("partial")
            raise RuntimeError("interrupted")
    assert json.loads(path.read_text(encoding="utf-8")) == {"a": 1}
    assert os.listdir(tmp_path) == ["report.json"]


def test_frames():
    """Test state, matrix and readout tables"""
    states = artifacts.states_frame(StateMatrix(np.array([[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]])))
    assert list(states.columns) == ["t", "x_1", "x_2"]
    assert list(states["t"]) == [1, 2, 3]
    assert list(states["x_2"]) == [0.4, 0.5, 0.6]

    matrix = artifacts.matrix_frame(np.array([[1, 0], [0, 1], [1, 1]]), "t", "s")
    assert list(matrix.columns) == ["t", "s_1", "s_2"]
    assert matrix.shape == (3, 3)


def test_readouts_frame(small_config, sine_series):
    """Test one column per step"""
    model = train(small_config, sine_series, seed=1)
    frame = artifacts.readouts_frame(model)
    assert list(frame.columns) == ["index", "w_step_1", "w_step_2"]
    assert len(frame) == 30
    assert isinstance(frame, pd.DataFrame)
    assert np.array_equal(frame["w_step_2"].to_numpy(), model.readout(2).w_out)
