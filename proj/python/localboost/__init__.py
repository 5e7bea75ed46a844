"""Localized boosting over weakly labeled data."""

import json

from ._core import (
    ConfigError,
    IoError,
    TrainingError,
    ValidationError,
    avg_pairwise_distance,
    clean_error,
    estimate_alpha,
    perturb_weights,
    predict,
    sample_cluster,
    update_data_weights,
)
from . import _core

__all__ = [
    "ConfigError",
    "IoError",
    "TrainingError",
    "ValidationError",
    "avg_pairwise_distance",
    "clean_error",
    "estimate_alpha",
    "perturb_weights",
    "predict",
    "prop1",
    "sample_cluster",
    "sweep",
    "train",
    "update_data_weights",
]


def prop1():
    return json.loads(_core.prop1())


def train(config, seed, out_dir):
    """Train one run from a config dict; returns the report dict."""
    return json.loads(_core.train(json.dumps(config), seed, str(out_dir)))


def sweep(config, seeds):
    return json.loads(_core.sweep(json.dumps(config), list(seeds)))
