"""Coded-exposure fly-scan CT: simulation, reconstruction and metrics."""

import json as _json

from ._codex import (
    ConfigError,
    NumericalError,
    SamplingPlan,
    angles_unique,
    apply_C,
    exposure_code,
    make_sampling_plan,
    nrmse,
    phantom,
    plan_for_n_theta,
    rmse,
)
from . import _codex


def _text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def validate_config(config):
    """Return the canonical config as a dict; raises ConfigError on invalid input."""
    return _json.loads(_codex.validate_config(_text(config)))


def config_hash(config):
    return _codex.config_hash(_text(config))


def simulate(config):
    """Simulate one acquisition; returns dict with phantom, counts and y arrays."""
    return _codex.simulate(_text(config))


def reconstruct(config, y):
    """Reconstruct view data y; returns dict with image and (iteration, primal, dual) residuals."""
    return _codex.reconstruct(_text(config), y)


__all__ = [
    "ConfigError",
    "NumericalError",
    "SamplingPlan",
    "angles_unique",
    "apply_C",
    "config_hash",
    "exposure_code",
    "make_sampling_plan",
    "nrmse",
    "phantom",
    "plan_for_n_theta",
    "reconstruct",
    "rmse",
    "simulate",
    "validate_config",
]
