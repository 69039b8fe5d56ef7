"""Mini-batch SGD training of fully connected classifiers."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_softmax, softmax

from ..config import SpectralStep, TrainConfig
from ..exceptions import (
    ContractViolationError,
    DimensionMismatchError,
    TrainingDivergenceError,
)
from ..linalg import svd
from ..models import Dataset
from .graph import ModelGraph, predict_labels
from .layers import Activation, DenseLayer

_LOGGER = logging.getLogger(__name__)


@dataclass
class _Parameters:
    """Mutable weights and biases of a dense model during training."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: list[Activation]

    @classmethod
    def from_model(cls, model: ModelGraph) -> _Parameters:
        if not model.is_dense:
            raise ContractViolationError("Only all-dense models can be trained")
        return cls(
            weights=[np.array(layer.w) for layer in model.layers],
            biases=[np.array(layer.bias) for layer in model.layers],
            activations=[layer.activation for layer in model.layers],
        )

    def to_model(self) -> ModelGraph:
        return ModelGraph.from_layers(
            [
                DenseLayer(w=w, bias=b, activation=act)
                for w, b, act in zip(
                    self.weights, self.biases, self.activations, strict=True
                )
            ]
        )


def _hidden(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.RELU:
        return np.maximum(z, 0.0)
    if activation is Activation.SOFTMAX:
        raise ContractViolationError("Softmax is only supported on the output layer")
    return z


def _loss_and_gradients(
    params: _Parameters,
    features: np.ndarray,
    labels: np.ndarray,
    weight_decay: float,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean softmax cross-entropy over the batch plus L2 penalty, and gradients.

    The output layer is always read as logits of a softmax, whatever its tag.
    """
    batch = features.shape[0]
    inputs = [features]
    pre_activations = []
    h = features
    last = len(params.weights) - 1
    for index, (w, b, act) in enumerate(
        zip(params.weights, params.biases, params.activations, strict=True)
    ):
        z = h @ w.T + b
        pre_activations.append(z)
        if index < last:
            h = _hidden(z, act)
            inputs.append(h)

    logits = pre_activations[-1]
    log_probs = log_softmax(logits, axis=1)
    rows = np.arange(batch)
    loss = -float(log_probs[rows, labels].mean())
    if weight_decay:
        loss += 0.5 * weight_decay * sum(float(np.sum(w * w)) for w in params.weights)

    delta = softmax(logits, axis=1)
    delta[rows, labels] -= 1.0
    delta /= batch

    grad_w: list[np.ndarray] = [np.empty(0)] * len(params.weights)
    grad_b: list[np.ndarray] = [np.empty(0)] * len(params.weights)
    for index in range(last, -1, -1):
        grad_w[index] = delta.T @ inputs[index] + weight_decay * params.weights[index]
        grad_b[index] = delta.sum(axis=0)
        if index > 0:
            delta = delta @ params.weights[index]
            if params.activations[index - 1] is Activation.RELU:
                delta = delta * (pre_activations[index - 1] > 0.0)
    return loss, grad_w, grad_b


def loss_and_gradients(
    model: ModelGraph,
    features: np.ndarray,
    labels: np.ndarray,
    weight_decay: float = 0.0,
) -> tuple[float, list[tuple[np.ndarray, np.ndarray]]]:
    """Return the batch loss and per-layer (dW, db) gradients of a dense model."""
    params = _Parameters.from_model(model)
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.input_dim:
        raise DimensionMismatchError(
            f"Samples of shape {x.shape} for a model taking {model.input_dim} inputs"
        )
    loss, grad_w, grad_b = _loss_and_gradients(
        params, x, np.asarray(labels, dtype=np.int64), weight_decay
    )
    return loss, list(zip(grad_w, grad_b, strict=True))


def project_step_spectrum(w: np.ndarray, step: SpectralStep) -> np.ndarray:
    """Keep the leading max(1, floor(fraction r)) singular values of ``w``.

    The remaining values are replaced by epsilon * s_1.
    """
    factors = svd(w)
    r = factors.rank_bound
    keep = max(1, math.floor(step.fraction * r))
    s = np.array(factors.s)
    s[keep:] = step.epsilon * s[0]
    return (factors.u * s) @ factors.vt


@dataclass
class Trainer:
    """Trains a ReLU MLP with a softmax output by mini-batch SGD."""

    config: TrainConfig
    loss_history: list[float] = field(default_factory=list)
    train_accuracy: float | None = None

    def __post_init__(self) -> None:
        """Seed the generator used for initialization and shuffling."""
        self._rng = np.random.default_rng(self.config.seed)

    def init_model(self) -> ModelGraph:
        """Return a He-initialized model with zero biases."""
        dims = self.config.layer_dims
        layers = []
        for index, (fan_in, fan_out) in enumerate(zip(dims, dims[1:], strict=False)):
            std = self.config.init_gain * math.sqrt(2.0 / fan_in)
            activation = (
                Activation.SOFTMAX if index == len(dims) - 2 else Activation.RELU
            )
            layers.append(
                DenseLayer(
                    w=self._rng.normal(0.0, std, size=(fan_out, fan_in)),
                    bias=np.zeros(fan_out),
                    activation=activation,
                )
            )
        return ModelGraph.from_layers(layers)

    def _check_dataset(self, dataset: Dataset, model: ModelGraph) -> None:
        if dataset.dimension != model.input_dim:
            raise DimensionMismatchError(
                f"Dataset has {dataset.dimension} features, model takes "
                f"{model.input_dim}"
            )
        if dataset.class_count > model.class_count:
            raise DimensionMismatchError(
                f"Dataset has {dataset.class_count} classes, model scores "
                f"{model.class_count}"
            )

    def fit(self, dataset: Dataset, model: ModelGraph | None = None) -> ModelGraph:
        """Train ``model`` (or a fresh one) on ``dataset`` and return the result.

        Raises:
            TrainingDivergenceError: if a batch loss becomes non-finite.
        """
        model = model or self.init_model()
        self._check_dataset(dataset, model)
        params = _Parameters.from_model(model)
        config = self.config
        features = np.asarray(dataset.features)
        labels = np.asarray(dataset.labels)
        count = dataset.sample_count

        for epoch in range(1, config.epochs + 1):
            order = self._rng.permutation(count)
            total = 0.0
            for start in range(0, count, config.batch_size):
                batch = order[start : start + config.batch_size]
                loss, grad_w, grad_b = _loss_and_gradients(
                    params, features[batch], labels[batch], config.weight_decay
                )
                if not math.isfinite(loss):
                    raise TrainingDivergenceError(epoch)
                total += loss * batch.size
                for index, (gw, gb) in enumerate(zip(grad_w, grad_b, strict=True)):
                    params.weights[index] -= config.learning_rate * gw
                    params.biases[index] -= config.learning_rate * gb
            if config.spectral_step is not None:
                for index in range(len(params.weights) - 1):
                    params.weights[index] = project_step_spectrum(
                        params.weights[index], config.spectral_step
                    )
            epoch_loss = total / count
            self.loss_history.append(epoch_loss)
            _LOGGER.debug(
                "Epoch %d/%d: loss %.6f", epoch, config.epochs, epoch_loss
            )

        trained = params.to_model()
        self.train_accuracy = float(
            np.mean(predict_labels(trained, features) == labels)
        )
        _LOGGER.info(
            "Trained %s for %d epochs: training accuracy %.4f",
            "-".join(str(d) for d in trained.layer_dims),
            config.epochs,
            self.train_accuracy,
        )
        return trained


def train_mlp(dataset: Dataset, config: TrainConfig) -> ModelGraph:
    """Train a fresh model described by ``config`` on ``dataset``."""
    return Trainer(config).fit(dataset)
