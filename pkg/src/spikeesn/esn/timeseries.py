"""Series ingestion, normalization, supervised framing, splits and synthetic benchmarks"""

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import pandas as pd

from .errors import DataError, DegenerateRangeError
from .model_settings import MACKEY_GLASS, NARMA10, SINE_MIX, SYNTHETIC_KINDS
from .streams import stream_rng

logger = logging.getLogger("spikeesn")


def _frozen(values) -> np.ndarray:
    """Return a read-only float copy"""
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Series:
    """Univariate real-valued series with optional timestamps"""

    values: np.ndarray
    name: str = "series"
    timestamps: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        """Validate and freeze the values"""
        values = _frozen(self.values).reshape(-1)
        if values.size < 1:
            raise DataError(f"series {self.name!r} is empty")
        if not np.all(np.isfinite(values)):
            raise DataError(f"series {self.name!r} contains non-finite values")
        object.__setattr__(self, "values", values)
        if self.timestamps is not None:
            stamps = np.array(self.timestamps, dtype=object).reshape(-1)
            if stamps.size != values.size:
                raise DataError("timestamps and values have different lengths")
            stamps.setflags(write=False)
            object.__setattr__(self, "timestamps", stamps)

    def __len__(self) -> int:
        return int(self.values.size)

    def slice(self, start: int, stop: Optional[int] = None) -> "Series":
        """Return the contiguous sub-series [start, stop)"""
        stamps = None if self.timestamps is None else self.timestamps[start:stop]
        return Series(self.values[start:stop], name=self.name, timestamps=stamps)


@dataclass(frozen=True)
class NormParams:
    """Min-max range of the training data"""

    u_min: float
    u_max: float

    def __post_init__(self):
        """Check the range is not degenerate"""
        if not (math.isfinite(self.u_min) and math.isfinite(self.u_max)):
            raise DegenerateRangeError("normalization range must be finite")
        if not self.u_max > self.u_min:
            raise DegenerateRangeError(f"degenerate range: u_min={self.u_min}, u_max={self.u_max}")

    @property
    def span(self) -> float:
        """u_max - u_min"""
        return self.u_max - self.u_min

    def normalize(self, values) -> np.ndarray:
        """Map values to [0, 1] over the fitted range (no clipping)"""
        return (np.asarray(values, dtype=float) - self.u_min) / self.span

    def denormalize(self, values) -> np.ndarray:
        """Inverse of normalize"""
        return np.asarray(values, dtype=float) * self.span + self.u_min

    def to_dict(self) -> dict[str, float]:
        """Return the parameters as a dictionary"""
        return dict(u_min=float(self.u_min), u_max=float(self.u_max))


@dataclass(frozen=True, eq=False)
class SupervisedSet:
    """Input/target pairs where each target lies ``step`` positions after its input"""

    inputs: np.ndarray
    targets: np.ndarray
    step: int

    def __post_init__(self):
        """Validate and freeze"""
        inputs = _frozen(self.inputs).reshape(-1)
        targets = _frozen(self.targets).reshape(-1)
        if inputs.size != targets.size:
            raise DataError(f"inputs ({inputs.size}) and targets ({targets.size}) differ in length")
        if self.step < 1:
            raise DataError(f"step must be positive, got {self.step}")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return int(self.inputs.size)

    def segment(self, start: int, stop: int) -> "SupervisedSet":
        """Return pairs [start, stop)"""
        return SupervisedSet(self.inputs[start:stop], self.targets[start:stop], self.step)

    def unshift(self) -> np.ndarray:
        """Rebuild the source series: all inputs followed by the last ``step`` targets"""
        return np.concatenate([self.inputs, self.targets[-self.step :]])


def load_csv(
    path: Union[str, os.PathLike], column: Union[str, int], time_column: Union[str, int, None] = None
) -> Series:
    """Read one column of a comma-separated file as a Series

    Lines starting with ``#`` are skipped. Rows are kept in file order.

    Args:
        path: csv file with a header row
        column: header name or zero-based column index
        time_column: optional column holding timestamps

    """
    if not os.path.exists(path):
        raise DataError(f"file not found: {path}")
    try:
        frame = pd.read_csv(path, comment="#", dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise DataError(f"empty column: {path} has no header or data") from None

    name = _resolve_column(frame, column, path)
    cells = frame[name]
    if cells.size == 0:
        raise DataError(f"empty column {name!r} in {path}")

    values = pd.to_numeric(cells.str.strip(), errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        row = int(bad[0])
        line = _table_line_numbers(path)[row + 1]
        raise DataError(f"cannot parse {cells.iloc[row]!r} in column {name!r} at line {line} of {path}")

    timestamps = None
    if time_column is not None:
        timestamps = frame[_resolve_column(frame, time_column, path)].to_numpy(dtype=object)
    logger.info(f"Loaded {values.size} values of column {name!r} from {path}")
    return Series(values, name=str(name), timestamps=timestamps)


def _table_line_numbers(path) -> list:
    """One-based file line numbers of the header and data rows, comment and blank lines excluded"""
    with open(path, encoding="utf-8") as stream:
        return [number for number, text in enumerate(stream, start=1) if text.split("#", 1)[0].strip()]


def _resolve_column(frame: pd.DataFrame, column: Union[str, int], path) -> str:
    """Return the header name for a name-or-index column selector"""
    if isinstance(column, str) and column in frame.columns:
        return column
    if isinstance(column, int) or (isinstance(column, str) and column.isdigit()):
        index = int(column)
        if 0 <= index < len(frame.columns):
            return frame.columns[index]
    raise DataError(f"column {column!r} not found in {path}")


def fit_normalizer(series: Series) -> NormParams:
    """Return the exact observed min/max of the series"""
    if len(series) < 2:
        raise DataError("at least two values are needed to fit the normalizer")
    u_min = float(np.min(series.values))
    u_max = float(np.max(series.values))
    if u_max == u_min:
        raise DegenerateRangeError(f"constant series {series.name!r}: u_min == u_max == {u_min}")
    return NormParams(u_min=u_min, u_max=u_max)


def make_supervised(series: Series, step: int) -> SupervisedSet:
    """Pair every value with the value ``step`` positions later"""
    if step < 1:
        raise DataError(f"step must be positive, got {step}")
    length = len(series)
    if step >= length:
        raise DataError(f"step {step} needs a series longer than {length}")
    return SupervisedSet(series.values[: length - step], series.values[step:], step)


def split_bounds(length: int, washout: int, train_fraction: float) -> tuple[int, int]:
    """Return (washout end, train end) for ``length`` samples

    The train segment holds floor((length - washout) * train_fraction) samples.
    """
    if washout < 0:
        raise DataError(f"washout must be non-negative, got {washout}")
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    remaining = length - washout
    n_train = int(math.floor(remaining * train_fraction))
    n_test = remaining - n_train
    if n_train < 2 or n_test < 1:
        raise DataError(
            f"insufficient length: {length} samples leave {max(n_train, 0)} train / {max(n_test, 0)} test "
            f"points after a washout of {washout}"
        )
    return washout, washout + n_train


def split(
    data: SupervisedSet, washout: int, train_fraction: float
) -> tuple[SupervisedSet, SupervisedSet, SupervisedSet]:
    """Cut a supervised set into contiguous washout, train and test segments"""
    washout_end, train_end = split_bounds(len(data), washout, train_fraction)
    return data.segment(0, washout_end), data.segment(washout_end, train_end), data.segment(train_end, len(data))


def split_series(series: Series, washout: int, train_fraction: float) -> tuple[Series, Series]:
    """Cut a raw series into a training part (washout included) and a test part

    The test part is scored after its own fresh washout.
    """
    _, train_end = split_bounds(len(series), washout, train_fraction)
    return series.slice(0, train_end), series.slice(train_end)


def gen_synthetic(kind: str, length: int, seed: int, sample_interval: float = 1.0) -> Series:
    """Generate a deterministic benchmark series

    Args:
        kind: mackey_glass, narma10 or sine_mix
        length: number of values
        seed: user seed, consumed through the ``data`` substream
        sample_interval: Mackey-Glass time units between consecutive values, also
            the Euler step; the delay must be a whole number of steps

    """
    if kind not in SYNTHETIC_KINDS:
        raise DataError(f"unknown synthetic kind {kind!r}, expected one of {SYNTHETIC_KINDS}")
    if length < 1:
        raise DataError(f"length must be positive, got {length}")
    if kind == "mackey_glass":
        return Series(_mackey_glass(length, seed, sample_interval), name=kind)
    if sample_interval != 1.0:
        raise DataError(f"sample_interval applies to mackey_glass only, got {sample_interval} for {kind}")
    generator = {"narma10": _narma10, "sine_mix": _sine_mix}[kind]
    return Series(generator(length, seed), name=kind)


def _mackey_glass(length: int, seed: int, sample_interval: float = 1.0) -> np.ndarray:
    """Euler integration of the Mackey-Glass delay equation, one value per step"""
    p = MACKEY_GLASS
    h = float(sample_interval)
    if not (math.isfinite(h) and h > 0.0):
        raise DataError(f"sample_interval must be positive, got {sample_interval}")
    delay = int(round(p["delay"] / h))
    if delay < 1 or abs(delay * h - p["delay"]) > 1e-9:
        raise DataError(f"delay {p['delay']} is not a whole number of steps of {h}")
    rng = stream_rng(seed, "data")
    transient = int(round(p["transient"] / h))
    total = transient + length
    x = np.empty(delay + total)
    x[: delay + 1] = p["history"] + rng.uniform(-p["jitter"], p["jitter"], delay + 1)
    for t in range(delay, delay + total - 1):
        lagged = x[t - delay]
        x[t + 1] = x[t] + h * (p["a"] * lagged / (1.0 + lagged ** p["power"]) - p["b"] * x[t])
    return x[delay + transient :]


def _narma10(length: int, seed: int) -> np.ndarray:
    """Order-10 NARMA system driven by uniform noise"""
    p = NARMA10
    order = p["order"]
    for attempt in range(8):
        rng = stream_rng(seed, "data", attempt)
        u = rng.uniform(0.0, p["input_high"], length)
        y = np.full(length, p["warm_start"])
        for t in range(order, length):
            y[t] = (
                p["alpha"] * y[t - 1]
                + p["beta"] * y[t - 1] * np.sum(y[t - order : t])
                + p["gamma"] * u[t - order] * u[t - 1]
                + p["delta"]
            )
            if abs(y[t]) > p["bound"]:
                logger.debug(f"NARMA10 realisation {attempt} diverged at t={t}, redrawing")
                break
        else:
            return y
    raise DataError(f"NARMA10 diverged for seed {seed}")


def _sine_mix(length: int, seed: int) -> np.ndarray:
    """Two incommensurate sinusoids plus Gaussian noise"""
    p = SINE_MIX
    rng = stream_rng(seed, "data")
    t = np.arange(length, dtype=float)
    phase = 2.0 * np.pi * t / p["period"]
    return np.sin(phase) + p["second_amplitude"] * np.sin(p["ratio"] * phase) + p["noise"] * rng.standard_normal(length)
