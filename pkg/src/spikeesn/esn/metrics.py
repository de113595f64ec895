"""RMSE and MAPE scoring"""

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DataError, DimensionError
from .model_settings import MAPE_EPS

logger = logging.getLogger("spikeesn")


@dataclass(frozen=True)
class EvalReport:
    """Scores of one model at one prediction step"""

    model: str
    step: int
    rmse: float
    mape: float
    n: int
    excluded: int
    seed: int

    def to_dict(self) -> dict:
        """Return the report as a JSON-ready dictionary"""
        return asdict(self)


def _pair(pred, target) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=float).reshape(-1)
    target = np.asarray(target, dtype=float).reshape(-1)
    if pred.size != target.size:
        raise DimensionError(f"{pred.size} predictions but {target.size} targets")
    if pred.size == 0:
        raise DataError("nothing to score")
    return pred, target


def rmse(pred, target) -> float:
    """sqrt(sum((pred - target)^2) / n)"""
    pred, target = _pair(pred, target)
    return float(np.sqrt(np.mean((pred - target) ** 2)))


def mape(pred, target, eps: float = MAPE_EPS) -> tuple[float, int]:
    """sum(|(pred - target) / target|) / n over targets with |target| > eps

    Returns:
        the score and the number of excluded near-zero targets

    """
    pred, target = _pair(pred, target)
    kept = np.abs(target) > eps
    excluded = int(target.size - np.count_nonzero(kept))
    if not np.any(kept):
        raise DataError(f"all {target.size} targets are within {eps:g} of zero")
    if excluded:
        logger.warning(f"MAPE excluded {excluded} near-zero targets")
    return float(np.mean(np.abs((pred[kept] - target[kept]) / target[kept]))), excluded


def evaluate_predictions(pred, target, model: str, step: int, seed: int, eps: float = MAPE_EPS) -> EvalReport:
    """Score predictions against targets"""
    score, excluded = mape(pred, target, eps)
    return EvalReport(
        model=model,
        step=int(step),
        rmse=rmse(pred, target),
        mape=score,
        n=int(np.size(target)),
        excluded=excluded,
        seed=int(seed),
    )
