"""Test the SGD trainer, gradients and spectral-step projection."""

from dataclasses import replace
from unittest.mock import patch

import numpy as np
import pytest

from arsvd.config import SpectralStep, TrainConfig
from arsvd.exceptions import (
    ContractViolationError,
    DimensionMismatchError,
    TrainingDivergenceError,
)
from arsvd.linalg import svd
from arsvd.models import Dataset
from arsvd.network.graph import ModelGraph, compress_model, predict_labels
from arsvd.network.layers import Activation, DenseLayer
from arsvd.network.trainer import (
    Trainer,
    loss_and_gradients,
    project_step_spectrum,
    train_mlp,
)


def _with_parameters(model, weights, biases):
    return ModelGraph.from_layers(
        [
            DenseLayer(w=w, bias=b, activation=layer.activation)
            for layer, w, b in zip(model.layers, weights, biases, strict=True)
        ]
    )


def _relu_masks(weights, biases, features):
    masks = []
    h = features
    for w, b in zip(weights[:-1], biases[:-1], strict=True):
        z = h @ w.T + b
        masks.append(z > 0.0)
        h = np.maximum(z, 0.0)
    return masks


class TestGradients:
    """Test backpropagation against central differences."""

    @pytest.mark.parametrize("weight_decay", [0.0, 0.01])
    def test_central_differences(self, rng, weight_decay):
        """Test every parameter of a toy model against finite differences."""
        model = Trainer(TrainConfig(layer_dims=(6, 12, 10, 4), seed=11)).init_model()
        model = _with_parameters(
            model,
            [layer.w for layer in model.layers],
            [rng.standard_normal(layer.out_dim) * 0.1 for layer in model.layers],
        )
        features = rng.standard_normal((5, 6))
        labels = np.array([0, 3, 1, 2, 3])
        _, grads = loss_and_gradients(model, features, labels, weight_decay)

        weights = [np.array(layer.w) for layer in model.layers]
        biases = [np.array(layer.bias) for layer in model.layers]
        base_masks = _relu_masks(weights, biases, features)
        step = 1e-5
        checked = 0
        for index, (grad_w, grad_b) in enumerate(grads):
            for params, grad in ((weights, grad_w), (biases, grad_b)):
                for position in np.ndindex(params[index].shape):
                    original = params[index][position]
                    losses = []
                    masks = []
                    for delta in (step, -step):
                        params[index][position] = original + delta
                        masks.append(_relu_masks(weights, biases, features))
                        losses.append(
                            loss_and_gradients(
                                _with_parameters(model, weights, biases),
                                features,
                                labels,
                                weight_decay,
                            )[0]
                        )
                    params[index][position] = original
                    if any(
                        not np.array_equal(a, b)
                        for perturbed in masks
                        for a, b in zip(perturbed, base_masks, strict=True)
                    ):
                        continue
                    numeric = (losses[0] - losses[1]) / (2 * step)
                    analytic = grad[position]

                    assert abs(numeric - analytic) <= 1e-4 * max(
                        abs(numeric), abs(analytic)
                    ) + 1e-7, (index, position)
                    checked += 1

        assert checked >= 200

    def test_input_shape_checked(self, small_model):
        """Test the feature width is validated."""
        with pytest.raises(DimensionMismatchError):
            loss_and_gradients(small_model, np.ones((2, 5)), np.array([0, 1]))

    def test_factored_model_rejected(self, small_model):
        """Test gradients need an all-dense model."""
        compressed = compress_model(small_model, 0.9).model

        with pytest.raises(ContractViolationError):
            loss_and_gradients(compressed, np.ones((1, 6)), np.array([0]))

    def test_uniform_loss(self):
        """Test zero weights give loss log(class_count)."""
        model = ModelGraph.from_layers(
            [DenseLayer(np.zeros((4, 3)), np.zeros(4), Activation.SOFTMAX)]
        )
        loss, _ = loss_and_gradients(model, np.ones((2, 3)), np.array([0, 2]))

        assert loss == pytest.approx(np.log(4))


class TestTrainer:
    """Test Trainer."""

    def test_init_model(self, tiny_train_config):
        """Test He initialization shapes, zero biases and activation tags."""
        model = Trainer(tiny_train_config).init_model()

        assert model.layer_dims == [8, 16, 3]
        assert [layer.activation for layer in model.layers] == [
            Activation.RELU,
            Activation.SOFTMAX,
        ]
        assert all(not layer.bias.any() for layer in model.layers)
        assert np.std(model.layers[0].w) == pytest.approx(np.sqrt(2 / 8), rel=0.3)

    def test_memorizes_single_sample(self):
        """Test one sample is fit to near-zero loss."""
        dataset = Dataset(
            features=np.array([[1.0, -0.5, 2.0, 0.3]]),
            labels=np.array([1]),
            class_count=3,
        )
        config = TrainConfig(
            layer_dims=(4, 16, 3), epochs=3000, learning_rate=0.5, batch_size=1
        )
        trainer = Trainer(config)
        model = trainer.fit(dataset)

        assert trainer.loss_history[-1] < 1e-2
        assert trainer.train_accuracy == 1.0
        assert predict_labels(model, dataset.features).tolist() == [1]

    def test_separable_blobs(self, tiny_blobs, tiny_train_config):
        """Test well separated blobs are learned."""
        train, test = tiny_blobs
        trainer = Trainer(replace(tiny_train_config, epochs=60))
        model = trainer.fit(train)

        assert trainer.train_accuracy >= 0.95
        assert np.mean(predict_labels(model, test.features) == test.labels) >= 0.9
        assert trainer.loss_history[-1] < trainer.loss_history[0]
        assert len(trainer.loss_history) == 60

    def test_seeded(self, tiny_blobs, tiny_train_config):
        """Test training is reproducible for a seed."""
        train, _ = tiny_blobs
        first = train_mlp(train, tiny_train_config)
        second = train_mlp(train, tiny_train_config)

        for a, b in zip(first.layers, second.layers, strict=True):
            assert np.array_equal(a.w, b.w)
            assert np.array_equal(a.bias, b.bias)

    def test_zero_epochs_returns_init(self, tiny_blobs, tiny_train_config):
        """Test zero epochs returns the initial weights."""
        train, _ = tiny_blobs
        config = replace(tiny_train_config, epochs=0)
        initial = Trainer(config).init_model()
        trained = Trainer(config).fit(train)

        assert np.array_equal(initial.layers[0].w, trained.layers[0].w)

    def test_zero_learning_rate_keeps_init(self, tiny_blobs, tiny_train_config):
        """Test a zero learning rate leaves every weight and bias unchanged."""
        train, _ = tiny_blobs
        config = replace(tiny_train_config, learning_rate=0.0, epochs=3)
        initial = Trainer(config).init_model()
        trainer = Trainer(config)
        trained = trainer.fit(train)

        assert len(trainer.loss_history) == 3
        for before, after in zip(initial.layers, trained.layers, strict=True):
            assert np.array_equal(before.w, after.w)
            assert np.array_equal(before.bias, after.bias)

    def test_divergence(self, tiny_blobs, tiny_train_config):
        """Test a non-finite loss raises with the epoch number."""
        train, _ = tiny_blobs
        with (
            patch(
                "arsvd.network.trainer._loss_and_gradients",
                return_value=(float("nan"), [], []),
            ),
            pytest.raises(TrainingDivergenceError) as excinfo,
        ):
            Trainer(tiny_train_config).fit(train)

        assert excinfo.value.epoch == 1
        assert excinfo.value.exit_code == 2

    def test_dataset_width_checked(self, sample_dataset, tiny_train_config):
        """Test the dataset must match the model input."""
        with pytest.raises(DimensionMismatchError):
            Trainer(tiny_train_config).fit(sample_dataset)

    def test_spectral_step_training(self, tiny_blobs, tiny_train_config):
        """Test hidden weights end with a step spectrum, the output layer free."""
        train, _ = tiny_blobs
        config = replace(
            tiny_train_config, spectral_step=SpectralStep(fraction=0.25, epsilon=1e-9)
        )
        model = Trainer(config).fit(train)
        s = svd(model.layers[0].w).s

        np.testing.assert_allclose(s[2:], 1e-9 * s[0], rtol=1e-3)
        assert svd(model.layers[1].w).s[-1] > 1e-6


class TestProjectStepSpectrum:
    """Test project_step_spectrum."""

    def test_tail_replaced(self, rng):
        """Test the tail becomes epsilon times the largest value."""
        w = rng.standard_normal((8, 6))
        projected = project_step_spectrum(w, SpectralStep(fraction=0.5, epsilon=1e-9))
        before = svd(w).s
        after = svd(projected).s

        np.testing.assert_allclose(after[:3], before[:3], rtol=1e-10)
        np.testing.assert_allclose(after[3:], 1e-9 * before[0], rtol=1e-3)

    def test_keeps_at_least_one(self, rng):
        """Test a small fraction still keeps the leading value."""
        w = rng.standard_normal((6, 6))
        projected = project_step_spectrum(w, SpectralStep(fraction=0.1, epsilon=0.0))

        assert np.linalg.matrix_rank(projected) == 1
