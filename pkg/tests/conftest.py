"""Test configuration and fixtures."""

from __future__ import annotations

import numpy as np
import pytest

from arsvd.config import BlobSpec, TrainConfig
from arsvd.harness.fixtures import SpectrumSpec, make_blobs, spectral_model
from arsvd.models import Dataset
from arsvd.network.graph import ModelGraph
from arsvd.network.layers import Activation, DenseLayer


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def identity4():
    """4x4 identity matrix."""
    return np.eye(4)


@pytest.fixture
def small_model(rng):
    """Dense 6-5-4-3 model with random weights and biases."""
    dims = (6, 5, 4, 3)
    layers = [
        DenseLayer(
            w=rng.standard_normal((m, n)),
            bias=rng.standard_normal(m) * 0.1,
            activation=Activation.SOFTMAX if index == 2 else Activation.RELU,
        )
        for index, (n, m) in enumerate(zip(dims, dims[1:], strict=False))
    ]
    return ModelGraph.from_layers(layers)


@pytest.fixture
def power_law_model():
    """Dense 64-32-10 model whose weights have power-law spectra."""
    return spectral_model(
        (64, 32, 10),
        [SpectrumSpec.power_law(32, 1.5), SpectrumSpec.power_law(10, 1.5)],
        seed=7,
    )


@pytest.fixture
def tiny_blobs():
    """Small, well separated 3-class blob task (train, test)."""
    return make_blobs(
        BlobSpec(
            class_count=3,
            samples_per_class=40,
            dimension=8,
            separation=10.0,
            cluster_std=0.5,
            test_fraction=0.25,
            seed=3,
        )
    )


@pytest.fixture
def tiny_train_config():
    """Training config matching the tiny blob task."""
    return TrainConfig(layer_dims=(8, 16, 3), epochs=20, learning_rate=0.1, seed=5)


@pytest.fixture
def sample_dataset():
    """Two-sample, two-feature dataset."""
    return Dataset(
        features=np.array([[1.5, 2.0], [0.0, 3.0]]),
        labels=np.array([0, 1]),
        class_count=2,
    )
