"""Command-line entry point"""

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import pandas as pd

from spikeesn import __version__
from spikeesn.configuration import Configuration, get_data, resolve_run_config
from spikeesn.esn import artifacts, plots
from spikeesn.esn.encoder import encode_series, mean_interval_profile, raster
from spikeesn.esn.errors import ConfigError, DataError, SpikeESNError
from spikeesn.esn.model_settings import MODES, SYNTHETIC_KINDS
from spikeesn.esn.pipeline import (
    SWEEP_COLUMNS,
    SweepAxis,
    adapt_psi,
    collect_states,
    evaluate,
    forecast,
    sweep,
    train,
)
from spikeesn.esn.readout import count_significant
from spikeesn.esn.reservoir import spike_drives
from spikeesn.esn.streams import EncoderStream
from spikeesn.esn.timeseries import Series, gen_synthetic, load_csv, split_series

logger = logging.getLogger("spikeesn")

COMMANDS = ["gen-data", "train", "predict", "bench", "sweep", "export-states", "export-weights"]
# commands that consume randomness and therefore need a seed
STOCHASTIC_COMMANDS = ["gen-data", "train", "predict", "bench", "sweep", "export-states"]
# exit status
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


@dataclass
class RunSpec:
    """One command invocation"""

    command: str
    config_path: Optional[str] = None
    overrides: tuple[str, ...] = ()
    seed: Optional[int] = None
    output_dir: str = "."
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        """Check the command and the seed"""
        if self.command not in COMMANDS:
            raise ConfigError("command", f"unknown command {self.command!r}, expected one of {COMMANDS}")
        if self.command in STOCHASTIC_COMMANDS and self.seed is None:
            raise ConfigError("seed", f"{self.command} needs --seed")
        self.overrides = tuple(self.overrides)


def _report_error(err: BaseException) -> None:
    """Print a single machine-readable error line"""
    print(json.dumps({"error": type(err).__name__, "message": str(err)}), file=sys.stderr)


def _out(run_spec: RunSpec, name: str) -> str:
    return os.path.join(run_spec.output_dir, name)


def _input_series(options: dict, seed: int) -> Series:
    """Series named by --data/--column, or generated from --kind/--length"""
    if options.get("data"):
        if options.get("column") is None:
            raise ConfigError("column", "--data needs --column")
        return load_csv(options["data"], options["column"], options.get("time_column"))
    if options.get("kind"):
        length = int(options.get("length") or 2000)
        return gen_synthetic(options["kind"], length, seed, float(options.get("sample_interval") or 1.0))
    raise ConfigError("data", "give either --data and --column or --kind")


def _resolve(run_spec: RunSpec):
    user_settings = Configuration().run_settings()
    return resolve_run_config(run_spec.config_path, run_spec.overrides, user_settings)


def _gen_data(run_spec: RunSpec) -> None:
    kind = run_spec.options.get("kind") or "mackey_glass"
    length = int(run_spec.options.get("length") or 2000)
    interval = float(run_spec.options.get("sample_interval") or 1.0)
    series = gen_synthetic(kind, length, run_spec.seed, interval)
    header = artifacts.provenance("gen-data", run_spec.seed, kind=kind, length=length, sample_interval=interval)
    artifacts.write_csv(artifacts.series_frame(series), _out(run_spec, "series.csv"), header)


def _train(run_spec: RunSpec) -> None:
    config, policy = _resolve(run_spec)
    series = _input_series(run_spec.options, run_spec.seed)
    os.makedirs(run_spec.output_dir, exist_ok=True)
    with artifacts.atomic_path(_out(run_spec, "train.log")) as log_path:
        handler = logging.FileHandler(log_path, encoding="utf8")
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
        logger.addHandler(handler)
        try:
            logger.info(f"spikeesn {__version__} train, seed {run_spec.seed}, config {json.dumps(config.to_dict())}")
            if run_spec.options.get("adapt"):
                result = adapt_psi(config, series, policy, run_spec.seed)
                logger.info(f"psi trace {result.trace.psi}, state means {result.trace.state_means}")
                model = result.model
            else:
                model = train(config, series, run_spec.seed)
            artifacts.save_model(model, _out(run_spec, "model.npz"))
        finally:
            logger.removeHandler(handler)
            handler.close()


def _predict(run_spec: RunSpec) -> None:
    model = artifacts.load_model(run_spec.options["model"])
    series = _input_series(run_spec.options, run_spec.seed)
    predictions = forecast(model, series, run_spec.seed)
    frame = artifacts.series_frame(series).rename(columns={series.name: "value"})
    for step in sorted(predictions):
        frame[f"pred_step_{step}"] = predictions[step]
    header = artifacts.provenance("predict", run_spec.seed, model.config, model_seed=model.seed)
    artifacts.write_csv(frame, _out(run_spec, "predictions.csv"), header)


def _bench(run_spec: RunSpec) -> None:
    config, _ = _resolve(run_spec)
    series = _input_series(run_spec.options, run_spec.seed)
    reports = []
    for mode in run_spec.options.get("modes") or [config.mode]:
        run_config = replace(config, mode=mode)
        train_part, test_part = split_series(series, run_config.washout, run_config.train_fraction)
        model = train(run_config, train_part, run_spec.seed)
        reports.extend(report.to_dict() for report in evaluate(model, test_part, run_spec.seed).values())
    document = dict(
        config=config.to_dict(),
        seed=run_spec.seed,
        provenance=artifacts.provenance("bench", run_spec.seed, series=series.name, length=len(series)),
        reports=reports,
    )
    artifacts.write_json(document, _out(run_spec, "reports.json"))


def parse_axis(text: str) -> SweepAxis:
    """Parse ``step=1..20`` or ``n_sam=1,5,10``"""
    name, separator, values = text.partition("=")
    if not separator:
        raise ConfigError("axis", f"expected name=values, got {text!r}")
    try:
        if ".." in values:
            low, high = values.split("..", 1)
            numbers = tuple(range(int(low), int(high) + 1))
        else:
            numbers = tuple(int(value) for value in values.split(",") if value.strip())
        return SweepAxis(name=name.strip(), values=numbers)
    except (ValueError, DataError) as err:
        raise ConfigError("axis", str(err)) from None


def _sweep(run_spec: RunSpec) -> None:
    config, _ = _resolve(run_spec)
    axis = parse_axis(run_spec.options["axis"])
    repeats = int(run_spec.options.get("repeats") or 1)
    if repeats < 1:
        raise ConfigError("repeats", f"must be positive, got {repeats}")
    options = dict(run_spec.options)
    if not options.get("data") and not options.get("kind"):
        options["kind"] = "mackey_glass"
    series = _input_series(options, run_spec.seed)
    seeds = [run_spec.seed + index for index in range(repeats)]
    workers = int(run_spec.options.get("workers") or 1)
    rows = sweep(config, axis, series, seeds, modes=run_spec.options.get("modes"), workers=workers)
    frame = pd.DataFrame([asdict(row) for row in rows], columns=SWEEP_COLUMNS)
    header = artifacts.provenance("sweep", run_spec.seed, config, axis=axis.name, values=list(axis.values), seeds=seeds)
    artifacts.write_csv(frame, _out(run_spec, "sweep.csv"), header)
    if run_spec.options.get("plot"):
        plots.plot_sweep(rows, axis.name, _out(run_spec, "sweep.png"))


def _export_states(run_spec: RunSpec) -> None:
    model = artifacts.load_model(run_spec.options["model"])
    series = _input_series(run_spec.options, run_spec.seed)
    what = run_spec.options.get("what") or "states"
    stream = "encoder/test"
    if what == "states":
        states = collect_states(model.config, model.weights, model.norm, series.values, run_spec.seed, stream)
        frame = artifacts.states_frame(states)
        matrix = states.matrix.T
    else:
        if model.config.mode != "spike":
            raise DataError(f"{what} exist only for spike-mode models")
        params = model.encoder_params()
        if what == "spikes":
            matrix = raster(encode_series(series.values, params, EncoderStream(run_spec.seed, stream)))
            frame = artifacts.matrix_frame(matrix, "t", "s")
        elif what == "currents":
            matrix = spike_drives(series.values, params, EncoderStream(run_spec.seed, stream))
            frame = artifacts.matrix_frame(matrix, "t", "c")
        else:
            matrix = mean_interval_profile(series.values, params)[:, None]
            frame = artifacts.matrix_frame(matrix, "t", "mean_interval")
    header = artifacts.provenance("export-states", run_spec.seed, model.config, what=what, model_seed=model.seed)
    artifacts.write_csv(frame, _out(run_spec, f"{what}.csv"), header)
    if run_spec.options.get("plot"):
        plots.plot_matrix(matrix, _out(run_spec, f"{what}.png"), what)


def _export_weights(run_spec: RunSpec) -> None:
    model = artifacts.load_model(run_spec.options["model"])
    threshold = run_spec.options.get("threshold")
    threshold = 0.1 if threshold is None else float(threshold)
    header = artifacts.provenance("export-weights", model.seed, model.config)
    artifacts.write_csv(artifacts.readouts_frame(model), _out(run_spec, "w_out.csv"), header)
    artifacts.write_csv(artifacts.matrix_frame(model.weights.w_in, "neuron", "in"), _out(run_spec, "w_in.csv"), header)
    w_res = artifacts.matrix_frame(model.weights.w_res, "neuron", "res")
    artifacts.write_csv(w_res, _out(run_spec, "w_res.csv"), header)
    summary = dict(
        provenance=header,
        threshold=threshold,
        realized_radius=model.weights.realized_radius,
        realized_sparsity=model.weights.realized_sparsity,
        steps={
            str(step): dict(
                significant=count_significant(readout, threshold),
                max_abs=float(abs(readout.w_out).max()),
            )
            for step, readout in sorted(model.readouts.items())
        },
    )
    artifacts.write_json(summary, _out(run_spec, "weights_summary.json"))
    if run_spec.options.get("plot"):
        weights = {step: readout.w_out for step, readout in model.readouts.items()}
        plots.plot_weights(weights, threshold, _out(run_spec, "w_out.png"))


HANDLERS = {
    "gen-data": _gen_data,
    "train": _train,
    "predict": _predict,
    "bench": _bench,
    "sweep": _sweep,
    "export-states": _export_states,
    "export-weights": _export_weights,
}


def run(run_spec: RunSpec) -> int:
    """Execute a command and return its exit status"""
    try:
        HANDLERS[run_spec.command](run_spec)
    except ConfigError as err:
        _report_error(err)
        return EXIT_USAGE
    except (SpikeESNError, OSError) as err:
        _report_error(err)
        return EXIT_FAILURE
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as one JSON line"""

    def error(self, message):
        """Print the error and exit with the usage status"""
        print(json.dumps({"error": "UsageError", "message": message}), file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _csv_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    """Command-line surface"""
    parser = _Parser(prog="spikeesn", description="Spike echo state network forecasting")
    parser.add_argument("-v", "--version", help="print the version", action="store_true")
    parser.add_argument("--log-level", help="logging level, overrides [global.logging] level")
    subparsers = parser.add_subparsers(dest="command")

    def command(name: str, help_text: str, seed: bool = True, data: bool = False, model: bool = False):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("-o", "--output-dir", default=".", help="directory for the artifacts")
        if seed:
            sub.add_argument("--seed", type=int, help="user seed of every random stream")
        if model:
            sub.add_argument("--model", required=True, help="model container written by train")
        if data:
            sub.add_argument("--data", help="csv file")
            sub.add_argument("--column", help="column name or zero-based index")
            sub.add_argument("--time-column", help="column holding timestamps")
            sub.add_argument("--kind", choices=SYNTHETIC_KINDS, help="generate the series instead of reading it")
            sub.add_argument("--length", type=int, help="length of the generated series")
            sub.add_argument("--sample-interval", type=float, default=1.0, help="Mackey-Glass time units per value")
        return sub

    def configurable(sub, modes: bool = True):
        sub.add_argument("--config", dest="config_path", help="run configuration file")
        sub.add_argument("--set", dest="overrides", action="append", default=[], help="section.key=value override")
        if modes:
            sub.add_argument("--modes", type=_csv_list, help=f"comma-separated subset of {MODES}")

    gen = command("gen-data", "write a synthetic series")
    gen.add_argument("--kind", choices=SYNTHETIC_KINDS, default="mackey_glass")
    gen.add_argument("--length", type=int, default=2000)
    gen.add_argument("--sample-interval", type=float, default=1.0, help="Mackey-Glass time units per value")

    train_cmd = command("train", "train a model", data=True)
    configurable(train_cmd, modes=False)
    train_cmd.add_argument("--adapt", action="store_true", help="adapt psi to the state band before saving")

    command("predict", "forecast every step of a trained model", data=True, model=True)

    configurable(command("bench", "train and evaluate on a train/test split", data=True))

    sweep_cmd = command("sweep", "average metrics over seeds along a step or n_sam axis", data=True)
    configurable(sweep_cmd)
    sweep_cmd.add_argument("--axis", required=True, help="step=1..20 or n_sam=1,5,10,20,50,100")
    sweep_cmd.add_argument("--repeats", type=int, default=1, help="number of seeds, counted up from --seed")
    sweep_cmd.add_argument("--workers", type=int, default=1, help="worker processes")
    sweep_cmd.add_argument("--plot", action="store_true", help="also write sweep.png")

    states_cmd = command("export-states", "dump reservoir states, spikes or currents", data=True, model=True)
    states_cmd.add_argument("--what", choices=["states", "spikes", "currents", "intervals"], default="states")
    states_cmd.add_argument("--plot", action="store_true", help="also write a heatmap")

    weights_cmd = command("export-weights", "dump the weight matrices", seed=False, model=True)
    weights_cmd.add_argument("--threshold", type=float, default=0.1, help="significance threshold on |w_out|")
    weights_cmd.add_argument("--plot", action="store_true", help="also write w_out.png")
    return parser


def _setup_logging(level: Optional[str]) -> None:
    if level is None:
        level = get_data("global.logging", "level") or "INFO"
    logging.basicConfig(format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logger.setLevel(str(level).upper())


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.version:
        print(__version__)
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE

    try:
        config = Configuration()
        if not config.is_valid():
            raise ConfigError("configuration", f"check and update your file: {config.config_file_path}")
        _setup_logging(args.log_level)
        options = {
            key: value
            for key, value in vars(args).items()
            if key not in ("version", "log_level", "command", "config_path", "overrides", "seed", "output_dir")
        }
        run_spec = RunSpec(
            command=args.command,
            config_path=getattr(args, "config_path", None),
            overrides=tuple(getattr(args, "overrides", ())),
            seed=getattr(args, "seed", None),
            output_dir=args.output_dir,
            options=options,
        )
    except (ConfigError, ValueError) as err:
        _report_error(err)
        return EXIT_USAGE
    logger.info(f"spikeesn version: {__version__}")
    return run(run_spec)


if __name__ == "__main__":
    sys.exit(main())
