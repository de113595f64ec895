"""End-to-end training, multi-step evaluation, psi adaptation and parameter sweeps"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .encoder import EncoderParams, count_out_of_range
from .errors import DataError, MissingStepError
from .metrics import EvalReport, evaluate_predictions
from .model_settings import (
    DEFAULT_ADAPTATION,
    DEFAULT_ENCODER,
    DEFAULT_MU,
    DEFAULT_PIPELINE,
    DEFAULT_RESERVOIR,
    MAX_STEP,
    MIN_TRAIN_POINTS,
    MODES,
)
from .readout import Readout, fit_ridge, predict
from .reservoir import ReservoirConfig, ReservoirWeights, StateMatrix, build_weights, run_esn, run_spike
from .streams import EncoderStream, stream_rng
from .timeseries import NormParams, Series, fit_normalizer, split_series

logger = logging.getLogger("spikeesn")


@dataclass(frozen=True)
class EncoderConfig:
    """Spike sampling times and synaptic time constant"""

    n_sam: int = DEFAULT_ENCODER["n_sam"]
    psi: float = DEFAULT_ENCODER["psi"]

    def __post_init__(self):
        """Check ranges"""
        if int(self.n_sam) != self.n_sam or self.n_sam < 1:
            raise DataError(f"n_sam must be a positive integer, got {self.n_sam}")
        if not self.psi > 0:
            raise DataError(f"psi must be positive, got {self.psi}")

    def params(self, norm: NormParams, seed: int) -> EncoderParams:
        """Bind the fitted normalization and the run seed"""
        return EncoderParams(n_sam=int(self.n_sam), norm=norm, psi=float(self.psi), seed=int(seed))


@dataclass(frozen=True)
class ModelConfig:
    """Everything needed to train a model"""

    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    reservoir: ReservoirConfig = field(default_factory=lambda: ReservoirConfig(**DEFAULT_RESERVOIR))
    mu: float = DEFAULT_MU
    washout: int = DEFAULT_PIPELINE["washout"]
    steps: tuple[int, ...] = tuple(DEFAULT_PIPELINE["steps"])
    mode: str = DEFAULT_PIPELINE["mode"]
    train_fraction: float = DEFAULT_PIPELINE["train_fraction"]

    def __post_init__(self):
        """Check ranges"""
        steps = tuple(int(step) for step in self.steps)
        object.__setattr__(self, "steps", steps)
        if not steps:
            raise DataError("steps must name at least one prediction step")
        if len(set(steps)) != len(steps):
            raise DataError(f"steps must not repeat, got {steps}")
        if any(step < 1 or step > MAX_STEP for step in steps):
            raise DataError(f"steps must lie in 1..{MAX_STEP}, got {steps}")
        if self.mode not in MODES:
            raise DataError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mu < 0:
            raise DataError(f"mu must be non-negative, got {self.mu}")
        if int(self.washout) != self.washout or self.washout < 0:
            raise DataError(f"washout must be a non-negative integer, got {self.washout}")
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")

    @property
    def n_in(self) -> int:
        """Width of the reservoir drive"""
        return int(self.encoder.n_sam) if self.mode == "spike" else 1

    def with_psi(self, psi: float) -> "ModelConfig":
        """Copy with another synaptic time constant"""
        return replace(self, encoder=replace(self.encoder, psi=float(psi)))

    def to_dict(self) -> dict:
        """Return the configuration grouped by section"""
        return dict(
            encoder=asdict(self.encoder),
            reservoir={key: value for key, value in asdict(self.reservoir).items() if key != "seed"},
            readout=dict(mu=self.mu),
            pipeline=dict(
                washout=self.washout, steps=list(self.steps), mode=self.mode, train_fraction=self.train_fraction
            ),
        )

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        """Inverse of to_dict"""
        pipeline = data.get("pipeline", {})
        return cls(
            encoder=EncoderConfig(**data.get("encoder", {})),
            reservoir=ReservoirConfig(**data.get("reservoir", {})),
            mu=data.get("readout", {}).get("mu", DEFAULT_MU),
            washout=pipeline.get("washout", DEFAULT_PIPELINE["washout"]),
            steps=tuple(pipeline.get("steps", DEFAULT_PIPELINE["steps"])),
            mode=pipeline.get("mode", DEFAULT_PIPELINE["mode"]),
            train_fraction=pipeline.get("train_fraction", DEFAULT_PIPELINE["train_fraction"]),
        )


@dataclass(frozen=True, eq=False)
class Model:
    """Trained artifact: configuration, reservoir, one readout per step and the normalization"""

    config: ModelConfig
    weights: ReservoirWeights
    readouts: dict[int, Readout]
    norm: NormParams
    seed: int
    state_mean: float = float("nan")

    def readout(self, step: int) -> Readout:
        """Return the readout of a prediction step"""
        try:
            return self.readouts[int(step)]
        except KeyError:
            available = sorted(self.readouts)
            raise MissingStepError(f"model has no readout for step {step}, available: {available}") from None

    def encoder_params(self) -> EncoderParams:
        """Encoder parameters bound to the fitted normalization"""
        return self.config.encoder.params(self.norm, self.seed)


@dataclass(frozen=True)
class AdaptationPolicy:
    """Band on the mean absolute state and the multiplicative psi update"""

    state_low: float = DEFAULT_ADAPTATION["state_low"]
    state_high: float = DEFAULT_ADAPTATION["state_high"]
    psi_step: float = DEFAULT_ADAPTATION["psi_step"]
    max_rounds: int = DEFAULT_ADAPTATION["max_rounds"]

    def __post_init__(self):
        """Check ranges"""
        if not 0.0 < self.state_low < self.state_high < 1.0:
            raise DataError(
                f"state_low and state_high must satisfy 0 < low < high < 1, got {self.state_low}, {self.state_high}"
            )
        if not self.psi_step > 1.0:
            raise DataError(f"psi_step must exceed 1, got {self.psi_step}")
        if int(self.max_rounds) != self.max_rounds or self.max_rounds < 1:
            raise DataError(f"max_rounds must be a positive integer, got {self.max_rounds}")

    def in_band(self, state_mean: float) -> bool:
        """True when the state mean satisfies the stop condition"""
        return self.state_low <= state_mean <= self.state_high


@dataclass
class AdaptationTrace:
    """psi value and state mean of every training round"""

    psi: list[float] = field(default_factory=list)
    state_means: list[float] = field(default_factory=list)
    converged: bool = False


class AdaptationResult(NamedTuple):
    """Final model, number of training rounds and the psi trace"""

    model: Model
    rounds: int
    trace: AdaptationTrace


def collect_states(
    config: ModelConfig, weights: ReservoirWeights, norm: NormParams, values, seed: int, stream: str
) -> StateMatrix:
    """Run the reservoir of either mode over raw series values, starting from x(0) = 0"""
    if config.mode == "spike":
        encoder = config.encoder.params(norm, seed)
        return run_spike(values, encoder, weights, EncoderStream(seed, stream))
    return run_esn(norm.normalize(values), weights)


def _check_length(length: int, washout: int, step: int, minimum: int, what: str) -> None:
    if length - washout - step < minimum:
        raise DataError(
            f"insufficient data: {what} needs washout {washout} + step {step} + {minimum} points, got {length}"
        )


def _fit(config: ModelConfig, series: Series, seed: int) -> tuple[Model, StateMatrix]:
    """Train and also return the post-washout training states"""
    length = len(series)
    _check_length(length, config.washout, max(config.steps), MIN_TRAIN_POINTS, "training")
    norm = fit_normalizer(series)
    weights = build_weights(config.reservoir, config.n_in, stream_rng(seed, "reservoir"))
    states = collect_states(config, weights, norm, series.values, seed, "encoder/train")
    targets = norm.normalize(series.values)

    readouts = {}
    for step in config.steps:
        readouts[step] = fit_ridge(
            states.columns(config.washout, length - step), targets[config.washout + step :], config.mu
        )
    kept = states.columns(config.washout)
    model = Model(
        config=config, weights=weights, readouts=readouts, norm=norm, seed=int(seed), state_mean=kept.mean_abs()
    )
    logger.info(
        f"Trained {config.mode} model on {length} points (washout {config.washout}, steps {list(config.steps)}), "
        f"radius {weights.realized_radius:.6f}, sparsity {weights.realized_sparsity:.4f}, "
        f"mean |x| {model.state_mean:.4f}"
    )
    return model, kept


def train(config: ModelConfig, series: Series, seed: int) -> Model:
    """Fit the normalizer, draw the reservoir, collect states and fit one readout per step"""
    model, _ = _fit(config, series, seed)
    return model


def forecast(model: Model, series: Series, seed: int, stream: str = "encoder/test") -> dict[int, np.ndarray]:
    """Predictions in original units for every input and step

    Entry t of the step-k array forecasts the value at position t + k.
    """
    count_out_of_range(series.values, model.norm)
    states = collect_states(model.config, model.weights, model.norm, series.values, seed, stream)
    return {step: model.norm.denormalize(predict(readout, states)) for step, readout in model.readouts.items()}


def evaluate(
    model: Model,
    series: Series,
    seed: int,
    steps: Optional[Sequence[int]] = None,
    stream: str = "encoder/test",
) -> dict[int, EvalReport]:
    """Score the model on a test series after a fresh washout

    Args:
        model: trained model
        series: test series in original units
        seed: run seed; the encoder uses the test substream unless ``stream`` says otherwise
        steps: steps to score, all trained steps when omitted
        stream: encoder substream name

    """
    steps = list(model.config.steps if steps is None else steps)
    readouts = {step: model.readout(step) for step in steps}
    length = len(series)
    washout = model.config.washout
    for step in steps:
        _check_length(length, washout, step, 1, "evaluation")

    count_out_of_range(series.values, model.norm)
    states = collect_states(model.config, model.weights, model.norm, series.values, seed, stream)
    reports = {}
    for step in steps:
        pred = model.norm.denormalize(predict(readouts[step], states.columns(washout, length - step)))
        reports[step] = evaluate_predictions(pred, series.values[washout + step :], model.config.mode, step, seed)
        logger.info(f"{model.config.mode} step {step}: rmse {reports[step].rmse:.6g}, mape {reports[step].mape:.6g}")
    return reports


def adapt_psi(config: ModelConfig, series: Series, policy: AdaptationPolicy, seed: int) -> AdaptationResult:
    """Retrain with a rescaled psi until the mean |x| of the training states lies in the band

    A state mean above the band divides psi by psi_step, one below multiplies it.
    """
    trace = AdaptationTrace()
    psi = float(config.encoder.psi)
    model = None
    for round_index in range(1, policy.max_rounds + 1):
        model, _ = _fit(config.with_psi(psi), series, seed)
        trace.psi.append(psi)
        trace.state_means.append(model.state_mean)
        logger.debug(f"adaptation round {round_index}: psi {psi:g}, mean |x| {model.state_mean:.4f}")
        if policy.in_band(model.state_mean):
            trace.converged = True
            break
        if config.mode != "spike":
            logger.warning("psi does not act on the plain ESN, stopping adaptation")
            break
        psi = psi / policy.psi_step if model.state_mean > policy.state_high else psi * policy.psi_step

    if trace.converged:
        logger.info(f"psi adaptation converged in {len(trace.psi)} rounds at psi {trace.psi[-1]:g}")
    else:
        logger.warning(f"psi adaptation stopped after {len(trace.psi)} rounds without reaching the band")
    return AdaptationResult(model=model, rounds=len(trace.psi), trace=trace)


@dataclass(frozen=True)
class SweepAxis:
    """Swept quantity (step or n_sam) and its values"""

    name: str
    values: tuple[int, ...]

    def __post_init__(self):
        """Check the axis"""
        if self.name not in ("step", "n_sam"):
            raise DataError(f"sweep axis must be step or n_sam, got {self.name!r}")
        values = tuple(int(value) for value in self.values)
        if not values or any(value < 1 for value in values):
            raise DataError(f"sweep axis {self.name} needs positive values, got {self.values}")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class SweepRow:
    """Metrics averaged over seeds at one (mode, step, n_sam) point"""

    mode: str
    step: int
    n_sam: int
    seed_count: int
    rmse_mean: float
    rmse_std: float
    mape_mean: float
    mape_std: float
    ln_rmse: float


SWEEP_COLUMNS = [name for name in SweepRow.__dataclass_fields__]


def _sweep_unit(unit: tuple[ModelConfig, Series, int]) -> list[tuple[tuple[str, int, int], EvalReport]]:
    """Train and evaluate one (config, seed) pair"""
    config, series, seed = unit
    train_part, test_part = split_series(series, config.washout, config.train_fraction)
    model = train(config, train_part, seed)
    reports = evaluate(model, test_part, seed)
    return [((config.mode, step, config.encoder.n_sam), report) for step, report in reports.items()]


def _std(values: list[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def sweep(
    base: ModelConfig,
    axis: SweepAxis,
    series: Series,
    seeds: Sequence[int],
    modes: Optional[Sequence[str]] = None,
    workers: int = 1,
) -> list[SweepRow]:
    """Train and evaluate across an axis, averaging the metrics over seeds

    Every (mode, axis value, seed) unit owns its configuration and random
    streams, so units may run in any order or in parallel.
    """
    seeds = [int(seed) for seed in seeds]
    if not seeds:
        raise DataError("a sweep needs at least one seed")
    modes = list(modes or [base.mode])
    units = []
    for mode in modes:
        if axis.name == "step":
            configs = [replace(base, mode=mode, steps=axis.values)]
        else:
            configs = [replace(base, mode=mode, encoder=replace(base.encoder, n_sam=n_sam)) for n_sam in axis.values]
        units.extend((config, series, seed) for config in configs for seed in seeds)
    logger.info(f"Sweeping {axis.name} over {list(axis.values)} for modes {modes} and {len(seeds)} seeds")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_unit, units))
    else:
        results = [_sweep_unit(unit) for unit in units]

    grouped: dict[tuple[str, int, int], list[EvalReport]] = {}
    for unit_result in results:
        for key, report in unit_result:
            grouped.setdefault(key, []).append(report)

    rows = []
    order = sorted(grouped, key=lambda key: (modes.index(key[0]), key[1], key[2]))
    for mode, step, n_sam in order:
        reports = grouped[(mode, step, n_sam)]
        rmses = [report.rmse for report in reports]
        mapes = [report.mape for report in reports]
        rmse_mean = float(np.mean(rmses))
        rows.append(
            SweepRow(
                mode=mode,
                step=step,
                n_sam=n_sam,
                seed_count=len(reports),
                rmse_mean=rmse_mean,
                rmse_std=_std(rmses),
                mape_mean=float(np.mean(mapes)),
                mape_std=_std(mapes),
                ln_rmse=math.log(rmse_mean) if rmse_mean > 0 else float("-inf"),
            )
        )
    return rows
