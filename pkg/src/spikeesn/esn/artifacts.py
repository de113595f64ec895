"""Reading and writing of run artifacts

Every file is written to a temporary name in its target directory and then
renamed into place. CSV artifacts start with one ``#`` comment line holding
the provenance JSON of the run.
"""

import json
import logging
import os
import tempfile
from contextlib import contextmanager
from typing import Iterator, Optional

import numpy as np
import pandas as pd

from spikeesn import __version__

from .errors import DataError
from .model_settings import MODEL_FORMAT_VERSION
from .pipeline import Model, ModelConfig
from .readout import Readout
from .reservoir import ReservoirWeights, StateMatrix
from .timeseries import NormParams, Series

logger = logging.getLogger("spikeesn")


def provenance(command: str, seed: Optional[int], config: Optional[ModelConfig] = None, **extra) -> dict:
    """Reproducibility header of an artifact"""
    header = dict(package="spikeesn", version=__version__, command=command, seed=seed)
    if config is not None:
        header["config"] = config.to_dict()
    header.update(extra)
    return header


@contextmanager
def atomic_path(path: str) -> Iterator[str]:
    """Yield a temporary path that replaces ``path`` when the block succeeds"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.splitext(path)[1])
    os.close(handle)
    try:
        yield temporary
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise
    logger.info(f"Wrote {path}")


def write_csv(frame: pd.DataFrame, path: str, header: dict) -> None:
    """Write a frame below a provenance comment line"""
    with atomic_path(path) as temporary, open(temporary, "w", encoding="utf-8", newline="") as stream:
        stream.write("# " + json.dumps(header, sort_keys=True) + "\n")
        frame.to_csv(stream, index=False, lineterminator="\n")


def read_provenance(path: str) -> Optional[dict]:
    """Return the provenance of a CSV artifact, None when it has none"""
    with open(path, encoding="utf-8") as stream:
        first = stream.readline()
    if first.startswith("# "):
        return json.loads(first[2:])
    return None


def write_json(document: dict, path: str) -> None:
    """Write an indented JSON document"""
    with atomic_path(path) as temporary, open(temporary, "w", encoding="utf-8") as stream:
        json.dump(document, stream, indent=2, sort_keys=True)
        stream.write("\n")


def series_frame(series: Series) -> pd.DataFrame:
    """Frame with a time column and the series values"""
    time = series.timestamps if series.timestamps is not None else np.arange(len(series))
    return pd.DataFrame({"time": time, series.name: series.values})


def states_frame(states: StateMatrix) -> pd.DataFrame:
    """One row per time step: t, x_1..x_n"""
    frame = pd.DataFrame(states.matrix.T, columns=[f"x_{i + 1}" for i in range(states.n_res)])
    frame.insert(0, "t", np.arange(1, states.count + 1))
    return frame


def matrix_frame(matrix: np.ndarray, row_label: str, column_prefix: str) -> pd.DataFrame:
    """Row-major dump of a matrix with 1-based row and column labels"""
    matrix = np.atleast_2d(matrix)
    frame = pd.DataFrame(matrix, columns=[f"{column_prefix}_{j + 1}" for j in range(matrix.shape[1])])
    frame.insert(0, row_label, np.arange(1, matrix.shape[0] + 1))
    return frame


def readouts_frame(model: Model) -> pd.DataFrame:
    """One row per output weight index, one column per prediction step"""
    steps = sorted(model.readouts)
    frame = pd.DataFrame({f"w_step_{step}": model.readouts[step].w_out for step in steps})
    frame.insert(0, "index", np.arange(1, model.weights.n_res + 1))
    return frame


def save_model(model: Model, path: str) -> None:
    """Store a model as an npz archive with a JSON ``meta`` entry"""
    meta = dict(
        format_version=MODEL_FORMAT_VERSION,
        version=__version__,
        config=model.config.to_dict(),
        seed=model.seed,
        norm=model.norm.to_dict(),
        steps=sorted(model.readouts),
        realized_radius=model.weights.realized_radius,
        realized_sparsity=model.weights.realized_sparsity,
        state_mean=model.state_mean,
    )
    arrays = {f"w_out_{step}": readout.w_out for step, readout in model.readouts.items()}
    with atomic_path(path) as temporary, open(temporary, "wb") as stream:
        meta_entry = np.array(json.dumps(meta, sort_keys=True))
        np.savez(stream, meta=meta_entry, w_in=model.weights.w_in, w_res=model.weights.w_res, **arrays)


def load_model(path: str) -> Model:
    """Inverse of save_model"""
    if not os.path.exists(path):
        raise DataError(f"model file not found: {path}")
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as err:
        raise DataError(f"{path} is not a model container: {err}") from None
    with archive:
        try:
            meta = json.loads(str(archive["meta"]))
        except KeyError:
            raise DataError(f"{path} is not a model container") from None
        if meta.get("format_version") != MODEL_FORMAT_VERSION:
            found = meta.get("format_version")
            raise DataError(f"{path} has container version {found}, expected {MODEL_FORMAT_VERSION}")
        config = ModelConfig.from_dict(meta["config"])
        weights = ReservoirWeights(
            w_in=archive["w_in"],
            w_res=archive["w_res"],
            realized_radius=meta["realized_radius"],
            realized_sparsity=meta["realized_sparsity"],
        )
        readouts = {int(step): Readout(w_out=archive[f"w_out_{step}"], mu=config.mu) for step in meta["steps"]}
    return Model(
        config=config,
        weights=weights,
        readouts=readouts,
        norm=NormParams(**meta["norm"]),
        seed=int(meta["seed"]),
        state_mean=float(meta["state_mean"]),
    )
