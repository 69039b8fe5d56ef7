"""Fully connected networks: layers, forward passes, compression and training."""

from __future__ import annotations

from .graph import (
    CompressionResult,
    ModelGraph,
    compress_model,
    forward,
    forward_dense,
    predict_labels,
    predict_scores,
    truncate_model,
)
from .layers import Activation, DenseLayer, FactoredLayer, Layer, forward_factored
from .metrics import Metrics, evaluate, layer_flops
from .trainer import Trainer, loss_and_gradients, train_mlp

__all__ = [
    "Activation",
    "CompressionResult",
    "DenseLayer",
    "FactoredLayer",
    "Layer",
    "Metrics",
    "ModelGraph",
    "Trainer",
    "compress_model",
    "evaluate",
    "forward",
    "forward_dense",
    "forward_factored",
    "layer_flops",
    "loss_and_gradients",
    "predict_labels",
    "predict_scores",
    "train_mlp",
    "truncate_model",
]
