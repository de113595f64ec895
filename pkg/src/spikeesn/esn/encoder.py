"""Poisson spike input layer and synaptic current kernel"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .streams import EncoderStream
from .timeseries import NormParams

logger = logging.getLogger("spikeesn")


@dataclass(frozen=True)
class EncoderParams:
    """Parameters of the spike input layer"""

    n_sam: int
    norm: NormParams
    psi: float
    seed: int = 0

    def __post_init__(self):
        """Check ranges"""
        if int(self.n_sam) != self.n_sam or self.n_sam < 1:
            raise DataError(f"n_sam must be a positive integer, got {self.n_sam}")
        if not self.psi > 0:
            raise DataError(f"psi must be positive, got {self.psi}")


@dataclass(frozen=True, eq=False)
class SpikeTrain:
    """Binary spike sequence of length n_sam and its 1-based spike positions"""

    bits: np.ndarray
    times: np.ndarray

    @classmethod
    def from_times(cls, times, n_sam: int) -> "SpikeTrain":
        """Build a train from 1-based spike positions"""
        times = np.array(times, dtype=np.int64).reshape(-1)
        if times.size and (np.any(np.diff(times) <= 0) or times[0] < 1 or times[-1] > n_sam):
            raise DataError(f"spike positions must strictly increase within 1..{n_sam}")
        bits = np.zeros(n_sam, dtype=np.uint8)
        bits[times - 1] = 1
        bits.setflags(write=False)
        times.setflags(write=False)
        return cls(bits=bits, times=times)

    @classmethod
    def from_bits(cls, bits) -> "SpikeTrain":
        """Build a train from a 0/1 vector"""
        bits = np.asarray(bits, dtype=np.uint8)
        return cls.from_times(np.flatnonzero(bits) + 1, bits.size)

    @property
    def n_sam(self) -> int:
        """Length of the sequence"""
        return int(self.bits.size)

    @property
    def count(self) -> int:
        """Number of spikes, i.e. the realized number of intervals"""
        return int(self.times.size)


def mean_interval(u: float, params: EncoderParams) -> float:
    """Average spike interval of an input value

    h = n_sam * (u_max - u) / (u_max - u_min), clamped into [1, n_sam]. Larger
    inputs give shorter intervals, hence denser trains.
    """
    norm = params.norm
    raw = params.n_sam * (norm.u_max - u) / (norm.u_max - norm.u_min)
    return float(min(max(raw, 1.0), float(params.n_sam)))


def poisson_draws(mean: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Raw Poisson interval draws, zeros included"""
    return rng.poisson(mean, size=size)


def sample_intervals(mean: float, n_sam: int, rng: np.random.Generator) -> np.ndarray:
    """Draw Poisson intervals until their running sum would exceed n_sam

    Draws of 0 count as 1 so every interval places its own spike. At most n_sam
    intervals can fit, so n_sam draws are taken at once and cut at the first
    running sum above n_sam.
    """
    draws = poisson_draws(mean, n_sam, rng)
    draws[draws == 0] = 1
    sums = np.cumsum(draws)
    return draws[: int(np.searchsorted(sums, n_sam, side="right"))]


def intervals_to_train(intervals, n_sam: int) -> SpikeTrain:
    """Place a spike at every cumulative interval sum"""
    intervals = np.asarray(intervals, dtype=np.int64)
    if intervals.size and np.any(intervals < 1):
        raise DataError("spike intervals must be at least 1")
    positions = np.cumsum(intervals)
    if positions.size and positions[-1] > n_sam:
        raise DataError(f"interval sum {positions[-1]} exceeds n_sam={n_sam}")
    return SpikeTrain.from_times(positions, n_sam)


def encode(u: float, params: EncoderParams, rng: np.random.Generator) -> SpikeTrain:
    """Convert one input value into a spike train"""
    intervals = sample_intervals(mean_interval(u, params), params.n_sam, rng)
    return intervals_to_train(intervals, params.n_sam)


def current_sequence(train: SpikeTrain, psi: float) -> np.ndarray:
    """Causal synaptic current of a spike train

    currents[t] = sum over spikes s <= t of exp(-(t - s) / psi), t = 1..n_sam.
    """
    if not psi > 0:
        raise DataError(f"psi must be positive, got {psi}")
    t_seq = np.arange(1, train.n_sam + 1, dtype=float)
    lag = t_seq[:, None] - train.times[None, :].astype(float)
    kernel = np.where(lag >= 0, np.exp(-np.clip(lag, 0.0, None) / psi), 0.0)
    return kernel.sum(axis=1)


def encode_series(values, params: EncoderParams, stream: EncoderStream) -> list[SpikeTrain]:
    """Encode every value with its own per-sample generator"""
    return [encode(float(u), params, stream.for_sample(i)) for i, u in enumerate(values)]


def raster(trains: list[SpikeTrain]) -> np.ndarray:
    """Stack trains into a (len(trains), n_sam) 0/1 matrix"""
    if not trains:
        return np.zeros((0, 0), dtype=np.uint8)
    return np.vstack([train.bits for train in trains])


def mean_interval_profile(values, params: EncoderParams) -> np.ndarray:
    """Average spike interval of every input value"""
    return np.array([mean_interval(float(u), params) for u in values])


def count_out_of_range(values, norm: NormParams) -> int:
    """Number of values outside the fitted normalization range"""
    values = np.asarray(values, dtype=float)
    outside = int(np.count_nonzero((values < norm.u_min) | (values > norm.u_max)))
    if outside:
        logger.warning(f"{outside} inputs fall outside [{norm.u_min:g}, {norm.u_max:g}], encoder mean is clamped")
    return outside
