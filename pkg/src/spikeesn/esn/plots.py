"""Diagnostic figures written next to the exported tables"""

import logging
from typing import Sequence

import numpy as np
from matplotlib.figure import Figure

from .pipeline import SweepRow

logger = logging.getLogger("spikeesn")


def plot_sweep(rows: Sequence[SweepRow], axis: str, path: str) -> None:
    """Natural-log RMSE against the swept quantity, one line per mode (and step for n_sam sweeps)"""
    figure = Figure(figsize=(6, 4.5))
    ax = figure.subplots()
    groups: dict[str, list[SweepRow]] = {}
    for row in rows:
        label = row.mode if axis == "step" else f"{row.mode}, step {row.step}"
        groups.setdefault(label, []).append(row)
    for label, group in groups.items():
        x = [row.step if axis == "step" else row.n_sam for row in group]
        ax.plot(x, [row.ln_rmse for row in group], marker="o", label=label)
    if axis == "n_sam":
        ax.set_xscale("log")
    ax.set_xlabel("prediction step" if axis == "step" else "spike sampling times")
    ax.set_ylabel("ln(RMSE)")
    ax.legend()
    figure.savefig(path)
    logger.info(f"Wrote {path}")


def plot_weights(weights: dict[int, np.ndarray], threshold: float, path: str) -> None:
    """Output weight values by index, one panel per step, with +/- threshold lines"""
    steps = sorted(weights)
    figure = Figure(figsize=(6, 2.5 * len(steps)))
    axes = np.atleast_1d(figure.subplots(len(steps), 1, sharex=True))
    for ax, step in zip(axes, steps):
        w_out = weights[step]
        ax.stem(np.arange(1, w_out.size + 1), w_out)
        ax.axhline(y=threshold, color="red", linestyle="--")
        ax.axhline(y=-threshold, color="red", linestyle="--")
        significant = int(np.count_nonzero(np.abs(w_out) > threshold))
        ax.set_ylabel(f"step {step}")
        ax.set_title(f"{significant} weights above {threshold:g}")
    axes[-1].set_xlabel("weight index")
    figure.tight_layout()
    figure.savefig(path)
    logger.info(f"Wrote {path}")


def plot_matrix(matrix: np.ndarray, path: str, label: str) -> None:
    """Heatmap of a (time, feature) matrix such as states or a spike raster"""
    matrix = np.atleast_2d(matrix)
    figure = Figure(figsize=(6, 4.5))
    ax = figure.subplots()
    mesh = ax.pcolormesh(matrix.T, shading="auto")
    figure.colorbar(mesh, ax=ax, pad=0.0, label=label)
    ax.set_xlabel("input sample")
    ax.set_ylabel(label)
    figure.savefig(path)
    logger.info(f"Wrote {path}")
