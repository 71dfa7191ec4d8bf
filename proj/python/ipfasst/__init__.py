"""Python access to the ipfasst experiments and analysis routines."""

from ._core import (
    ConfigError,
    Error,
    IoError,
    NonConvergence,
    damping_factor,
    damping_scan,
    experiment_names,
    iteration_matrix,
    quadrature,
    resolve_config,
)
from ._core import run_experiment as _run_experiment

__all__ = [
    "ConfigError",
    "Error",
    "IoError",
    "NonConvergence",
    "damping_factor",
    "damping_scan",
    "experiment_names",
    "iteration_matrix",
    "quadrature",
    "resolve_config",
    "run_experiment",
]


def run_experiment(experiment, overrides=(), config=""):
    """Run an experiment; returns (rows as dicts, csv text).

    `overrides` is a sequence of "key=value" strings or a dict.
    """
    if isinstance(overrides, dict):
        overrides = [f"{k}={v}" for k, v in overrides.items()]
    columns, rows, csv = _run_experiment(experiment, list(overrides), config)
    return [dict(zip(columns, r)) for r in rows], csv
