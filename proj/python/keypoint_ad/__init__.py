"""Keypoint-descriptor anomaly detection: detectors, descriptor, classifiers, evaluation."""

import json

from ._kpad import (
    Error,
    Keypoint,
    Model,
    build_vector,
    describe,
    detect,
    roc_auc,
    run_cli,
    select_threshold,
    synthetic_biscuit,
    synthetic_texture,
)
from ._kpad import train as _train

__all__ = [
    "Error",
    "Keypoint",
    "Model",
    "build_vector",
    "describe",
    "detect",
    "roc_auc",
    "run_cli",
    "select_threshold",
    "synthetic_biscuit",
    "synthetic_texture",
    "train",
]


def train(x, labels, model="ocsvm", **params):
    """Fit `model` on rows of `x`; labels are 0 for OK and 1 for NOK."""
    return _train(x, list(labels), model, json.dumps(params))
