"""Ridge-regression readout"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DataError, DimensionError, SingularSystemError
from .model_settings import RIDGE_RESIDUAL_TOL
from .reservoir import StateMatrix

logger = logging.getLogger("spikeesn")


@dataclass(frozen=True, eq=False)
class Readout:
    """Output weight row and the regularization it was fitted with"""

    w_out: np.ndarray
    mu: float

    def __post_init__(self):
        """Freeze the weights"""
        w_out = np.array(self.w_out, dtype=float).reshape(-1)
        if not np.all(np.isfinite(w_out)):
            raise DataError("output weights are not finite")
        w_out.setflags(write=False)
        object.__setattr__(self, "w_out", w_out)


def normal_equation_residual(readout: Readout, states: StateMatrix, targets) -> float:
    """Norm of W_out (X X^T + mu I) - y X^T"""
    x = states.matrix
    y = np.asarray(targets, dtype=float)
    lhs = (readout.w_out @ x) @ x.T + readout.mu * readout.w_out
    return float(np.linalg.norm(lhs - y @ x.T))


def fit_ridge(states: StateMatrix, targets, mu: float) -> Readout:
    """Solve W_out = y X^T (X X^T + mu I)^-1 by Cholesky factorization

    When there are fewer states than neurons the equivalent system
    W_out = y (X^T X + mu I)^-1 X^T is solved instead; at mu = 0 it gives the
    minimum-norm interpolating weights.
    """
    x = states.matrix
    y = np.asarray(targets, dtype=float).reshape(-1)
    if states.count < 1:
        raise DataError("no states to fit")
    if y.size != states.count:
        raise DimensionError(f"{states.count} states but {y.size} targets")
    if mu < 0:
        raise DataError(f"mu must be non-negative, got {mu}")

    n_res, count = x.shape
    try:
        if n_res <= count:
            gram = x @ x.T + mu * np.eye(n_res)
            w_out = cho_solve(cho_factor(gram), x @ y)
        else:
            gram = x.T @ x + mu * np.eye(count)
            w_out = x @ cho_solve(cho_factor(gram), y)
    except LinAlgError as err:
        raise SingularSystemError(f"ridge system is singular at mu={mu}: {err}") from None

    readout = Readout(w_out=w_out, mu=float(mu))
    residual = normal_equation_residual(readout, states, y)
    tolerance = RIDGE_RESIDUAL_TOL * (1.0 + float(np.linalg.norm(y)))
    if residual > tolerance:
        logger.warning(f"ridge residual {residual:.3g} exceeds {tolerance:.3g} (mu={mu:g})")
    else:
        logger.debug(f"ridge residual {residual:.3g}")
    return readout


def predict(readout: Readout, states: StateMatrix) -> np.ndarray:
    """y_hat(t) = sum_i w_i x_i(t)"""
    if states.n_res != readout.w_out.size:
        raise DimensionError(f"readout has {readout.w_out.size} weights but states have {states.n_res} rows")
    return readout.w_out @ states.matrix


def count_significant(readout: Readout, threshold: float) -> int:
    """Number of output weights with |w| above the threshold"""
    return int(np.count_nonzero(np.abs(readout.w_out) > threshold))
