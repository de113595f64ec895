"""Fixed random reservoir: weight generation, state recursion and state collection"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, eigs

from .encoder import EncoderParams, current_sequence, encode
from .errors import ConvergenceError, DataError, DimensionError, WeightGenerationError
from .model_settings import (
    DEGENERATE_RADIUS,
    DENSE_RADIUS_LIMIT,
    MAX_WEIGHT_RETRIES,
    RADIUS_ARNOLDI_K,
    RADIUS_MAX_ITER,
    RADIUS_TOL,
)
from .streams import EncoderStream

logger = logging.getLogger("spikeesn")


@dataclass(frozen=True)
class ReservoirConfig:
    """Size, spectral radius, density and input scaling of the reservoir"""

    n_res: int = 100
    rho: float = 0.9
    eta: float = 0.1
    input_scale: float = 0.8
    seed: int = 0

    def __post_init__(self):
        """Check ranges"""
        if int(self.n_res) != self.n_res or self.n_res < 1:
            raise DataError(f"n_res must be a positive integer, got {self.n_res}")
        if not 0.0 < self.rho < 1.0:
            raise DataError(f"rho must lie in (0, 1), got {self.rho}")
        if not 0.0 < self.eta <= 1.0:
            raise DataError(f"eta must lie in (0, 1], got {self.eta}")
        if self.eta * self.n_res**2 < 1.0:
            raise DataError(
                f"eta {self.eta} leaves less than one expected nonzero in a {self.n_res}x{self.n_res} matrix"
            )
        if not self.input_scale > 0:
            raise DataError(f"input_scale must be positive, got {self.input_scale}")


@dataclass(frozen=True, eq=False)
class ReservoirWeights:
    """Input and internal weight matrices plus their realized statistics"""

    w_in: np.ndarray
    w_res: np.ndarray
    realized_radius: float
    realized_sparsity: float

    def __post_init__(self):
        """Check shapes"""
        n_res = self.w_res.shape[0]
        if self.w_res.ndim != 2 or self.w_res.shape != (n_res, n_res):
            raise DimensionError(f"w_res must be square, got {self.w_res.shape}")
        if self.w_in.ndim != 2 or self.w_in.shape[0] != n_res:
            raise DimensionError(f"w_in must have {n_res} rows, got {self.w_in.shape}")

    @property
    def n_res(self) -> int:
        """Number of reservoir neurons"""
        return int(self.w_res.shape[0])

    @property
    def n_in(self) -> int:
        """Width of the drive vector"""
        return int(self.w_in.shape[1])


@dataclass(frozen=True, eq=False)
class StateMatrix:
    """Column-stacked reservoir states x(1..T), shape (n_res, T)"""

    matrix: np.ndarray

    @property
    def count(self) -> int:
        """Number of collected states T"""
        return int(self.matrix.shape[1])

    @property
    def n_res(self) -> int:
        """State dimension"""
        return int(self.matrix.shape[0])

    def columns(self, start: int, stop: Optional[int] = None) -> "StateMatrix":
        """Return states [start, stop)"""
        return StateMatrix(self.matrix[:, start:stop])

    def mean_abs(self) -> float:
        """Mean absolute state value"""
        return float(np.mean(np.abs(self.matrix))) if self.matrix.size else 0.0


def spectral_radius(
    m, tol: float = RADIUS_TOL, max_iter: int = RADIUS_MAX_ITER, dense_limit: int = DENSE_RADIUS_LIMIT
) -> float:
    """Largest eigenvalue modulus of a square matrix

    Matrices up to ``dense_limit`` rows are solved densely. Larger ones use
    implicitly restarted Arnoldi iteration from a fixed start vector, asking for
    several leading eigenvalues so that close competitors of the dominant one
    and complex-conjugate pairs are resolved.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DataError("matrix has non-finite entries")
    if not np.any(m):
        return 0.0
    n = m.shape[0]
    if n <= max(dense_limit, 2):
        return float(np.max(np.abs(np.linalg.eigvals(m))))
    k = min(RADIUS_ARNOLDI_K, n - 2)
    ncv = min(n, max(2 * k + 1, 20))
    v0 = np.random.default_rng(n).standard_normal(n)
    try:
        values = eigs(m, k=k, which="LM", v0=v0, ncv=ncv, tol=tol, maxiter=max_iter, return_eigenvectors=False)
    except ArpackNoConvergence as err:
        estimate = float(np.max(np.abs(err.eigenvalues))) if len(err.eigenvalues) else float("nan")
        raise ConvergenceError(f"spectral radius did not converge in {max_iter} iterations", estimate) from None
    return float(np.max(np.abs(values)))


def gen_internal_weights(config: ReservoirConfig, rng: np.random.Generator) -> np.ndarray:
    """Sparse uniform internal matrix rescaled to spectral radius rho

    Entries are Uniform[-1, 1] kept with probability eta. An all-zero (or
    nilpotent) draw is redrawn from the same stream.
    """
    n = config.n_res
    for attempt in range(MAX_WEIGHT_RETRIES + 1):
        dense = rng.uniform(-1.0, 1.0, size=(n, n))
        mask = rng.random(size=(n, n)) < config.eta
        w = np.where(mask, dense, 0.0)
        radius = spectral_radius(w)
        if radius >= DEGENERATE_RADIUS:
            return w * (config.rho / radius)
        logger.debug(f"degenerate internal weight draw {attempt} (radius {radius:g}), redrawing")
    raise WeightGenerationError(f"{MAX_WEIGHT_RETRIES + 1} degenerate internal weight draws in a row")


def gen_input_weights(config: ReservoirConfig, n_in: int, rng: np.random.Generator) -> np.ndarray:
    """Dense Uniform[-input_scale, input_scale] input matrix of shape (n_res, n_in)"""
    if n_in < 1:
        raise DimensionError(f"input width must be positive, got {n_in}")
    return rng.uniform(-config.input_scale, config.input_scale, size=(config.n_res, n_in))


def build_weights(config: ReservoirConfig, n_in: int, rng: Optional[np.random.Generator] = None) -> ReservoirWeights:
    """Generate W_in and W_res

    Args:
        config: reservoir parameters
        n_in: drive width (n_sam for the spike path, 1 for the plain ESN)
        rng: generator; defaults to one seeded with config.seed

    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    w_in = gen_input_weights(config, n_in, rng)
    w_res = gen_internal_weights(config, rng)
    radius = spectral_radius(w_res)
    sparsity = float(np.count_nonzero(w_res)) / w_res.size
    logger.debug(f"reservoir n_res={config.n_res}: radius {radius:.9f}, sparsity {sparsity:.4f}")
    return ReservoirWeights(w_in=w_in, w_res=w_res, realized_radius=radius, realized_sparsity=sparsity)


def update_state(
    x_prev: np.ndarray,
    drive: np.ndarray,
    weights: ReservoirWeights,
    activation: Callable[[np.ndarray], np.ndarray] = np.tanh,
) -> np.ndarray:
    """x(t) = activation(W_in drive + W_res x(t-1))"""
    x_prev = np.asarray(x_prev, dtype=float)
    drive = np.asarray(drive, dtype=float)
    if x_prev.shape != (weights.n_res,):
        raise DimensionError(f"state has shape {x_prev.shape}, expected ({weights.n_res},)")
    if drive.shape != (weights.n_in,):
        raise DimensionError(f"drive has shape {drive.shape}, expected ({weights.n_in},)")
    return activation(weights.w_in @ drive + weights.w_res @ x_prev)


def run_drive(
    drives: np.ndarray,
    weights: ReservoirWeights,
    x0: Optional[np.ndarray] = None,
    activation: Callable[[np.ndarray], np.ndarray] = np.tanh,
) -> StateMatrix:
    """Run the recursion over recorded drive vectors, one row per step

    Args:
        drives: (T, n_in) drive matrix
        weights: reservoir weights
        x0: initial state, zero when omitted
        activation: state nonlinearity

    """
    drives = np.asarray(drives, dtype=float)
    if drives.ndim != 2 or drives.shape[1] != weights.n_in:
        raise DimensionError(f"drives have shape {drives.shape}, expected (T, {weights.n_in})")
    x = np.zeros(weights.n_res) if x0 is None else np.asarray(x0, dtype=float)
    if x.shape != (weights.n_res,):
        raise DimensionError(f"initial state has shape {x.shape}, expected ({weights.n_res},)")
    projected = weights.w_in @ drives.T
    states = np.empty((weights.n_res, drives.shape[0]))
    for t in range(drives.shape[0]):
        x = activation(projected[:, t] + weights.w_res @ x)
        states[:, t] = x
    return StateMatrix(states)


def spike_drives(inputs, encoder: EncoderParams, stream: EncoderStream) -> np.ndarray:
    """Current sequences of every input, shape (T, n_sam)"""
    inputs = np.asarray(inputs, dtype=float).reshape(-1)
    drives = np.empty((inputs.size, encoder.n_sam))
    for i, u in enumerate(inputs):
        drives[i] = current_sequence(encode(float(u), encoder, stream.for_sample(i)), encoder.psi)
    return drives


def run_spike(inputs, encoder: EncoderParams, weights: ReservoirWeights, stream: EncoderStream) -> StateMatrix:
    """Encode each input, turn it into a current sequence and update the reservoir"""
    inputs = np.asarray(inputs, dtype=float).reshape(-1)
    if inputs.size == 0:
        raise DataError("no inputs to run")
    if weights.n_in != encoder.n_sam:
        raise DimensionError(f"w_in has {weights.n_in} columns but n_sam={encoder.n_sam}")
    return run_drive(spike_drives(inputs, encoder, stream), weights)


def run_esn(inputs, weights: ReservoirWeights) -> StateMatrix:
    """Plain ESN recursion driven by the scalar input itself"""
    inputs = np.asarray(inputs, dtype=float).reshape(-1)
    if inputs.size == 0:
        raise DataError("no inputs to run")
    if weights.n_in != 1:
        raise DimensionError(f"the plain ESN needs a single-column w_in, got {weights.n_in}")
    return run_drive(inputs[:, None], weights)
