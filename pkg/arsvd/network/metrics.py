"""Accuracy, macro-F1, timing and FLOP measurement of a model."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.metrics import accuracy_score, f1_score

from ..const import DEFAULT_TIMING_REPEATS, MIN_TIMING_REPEATS
from ..exceptions import ContractViolationError, DimensionMismatchError
from ..linalg import FlopMeter
from ..models import Dataset
from ..utils import median_seconds
from .graph import ModelGraph, forward, predict_labels, predict_scores

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Metrics:
    """Evaluation outcome of one model on one dataset."""

    accuracy: float
    macro_f1: float
    seconds_per_sample: float
    flops_per_sample: int
    total_flops: int
    sample_count: int


def layer_flops(model: ModelGraph) -> dict[str, int]:
    """Return metered multiply-adds per layer for one forward pass."""
    meter = FlopMeter()
    forward(model, np.zeros(model.input_dim), meter)
    return dict(meter.per_layer)


def evaluate(
    model: ModelGraph, dataset: Dataset, repeats: int = DEFAULT_TIMING_REPEATS
) -> Metrics:
    """Score ``model`` on ``dataset``.

    Macro-F1 averages over every class of the model; a class that never occurs
    in labels or predictions scores 0. Wall time is the median of ``repeats``
    full passes after one warm-up pass.
    FLOPs are multiply-adds of the metered single-sample pass, which does not
    depend on the input values.
    """
    if repeats < MIN_TIMING_REPEATS:
        raise ContractViolationError(
            f"Timing needs at least {MIN_TIMING_REPEATS} repetitions, got {repeats}"
        )
    if dataset.dimension != model.input_dim:
        raise DimensionMismatchError(
            f"Dataset has {dataset.dimension} features, model takes "
            f"{model.input_dim}"
        )

    features = dataset.features
    predicted = predict_labels(model, features)
    accuracy = float(accuracy_score(dataset.labels, predicted))
    macro_f1 = float(
        f1_score(
            dataset.labels,
            predicted,
            labels=np.arange(model.class_count),
            average="macro",
            zero_division=0,
        )
    )

    elapsed = median_seconds(lambda: predict_scores(model, features), repeats)
    meter = FlopMeter()
    forward(model, features[0], meter)
    count = dataset.sample_count

    _LOGGER.debug(
        "Evaluated %d samples: accuracy %.4f, macro-F1 %.4f, %d FLOPs/sample",
        count,
        accuracy,
        macro_f1,
        meter.multiply_adds,
    )
    return Metrics(
        accuracy=accuracy,
        macro_f1=macro_f1,
        seconds_per_sample=elapsed / count,
        flops_per_sample=meter.multiply_adds,
        total_flops=meter.multiply_adds * count,
        sample_count=count,
    )
