"""Synthetic fixtures: controlled spectra, matrices, blob tasks and models."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()

import numpy as np
from sklearn.datasets import make_blobs as sklearn_make_blobs
from sklearn.model_selection import train_test_split
from sklearn.preprocessing import StandardScaler

from ..config import BlobSpec, ExperimentConfig
from ..exceptions import ContractViolationError, DimensionMismatchError
from ..linalg import DenseMatrix, Vector, as_matrix
from ..models import Dataset
from ..network.graph import ModelGraph
from ..network.layers import Activation, DenseLayer
from ..network.trainer import Trainer

_LOGGER = logging.getLogger(__name__)


class SpectrumKind(StrEnum):
    """Shape of a synthetic singular-value spectrum."""

    POWER_LAW = "power-law"
    FLAT = "flat"
    STEP = "step"
    NOISY_LOW_RANK = "noisy-low-rank"


@dataclass(frozen=True)
class SpectrumSpec:
    """Describes a non-increasing, nonnegative spectrum of a given length.

    ``alpha`` applies to power laws, ``rank`` (g) and ``epsilon`` to steps,
    ``rank`` and ``noise`` (sigma) to noisy low-rank spectra.
    """

    kind: SpectrumKind
    length: int
    alpha: float = 1.5
    rank: int = 1
    epsilon: float = 0.0
    noise: float = 0.0

    def __post_init__(self) -> None:
        """Validate the parameters of the spectrum kind."""
        object.__setattr__(self, "kind", SpectrumKind(self.kind))
        if self.length < 1:
            raise ContractViolationError(
                f"Spectrum length must be positive: {self.length}"
            )
        if self.kind in (SpectrumKind.STEP, SpectrumKind.NOISY_LOW_RANK) and not (
            1 <= self.rank <= self.length
        ):
            raise ContractViolationError(
                f"Step rank {self.rank} outside [1, {self.length}]"
            )
        if self.epsilon < 0.0 or self.noise < 0.0 or self.alpha < 0.0:
            raise ContractViolationError("alpha, epsilon and noise must be nonnegative")

    @classmethod
    def power_law(cls, length: int, alpha: float) -> SpectrumSpec:
        """Return s_i = i^-alpha."""
        return cls(SpectrumKind.POWER_LAW, length, alpha=alpha)

    @classmethod
    def flat(cls, length: int) -> SpectrumSpec:
        """Return all ones."""
        return cls(SpectrumKind.FLAT, length)

    @classmethod
    def step(cls, length: int, rank: int, epsilon: float) -> SpectrumSpec:
        """Return ``rank`` ones followed by ``epsilon``."""
        return cls(SpectrumKind.STEP, length, rank=rank, epsilon=epsilon)

    @classmethod
    def noisy_low_rank(cls, length: int, rank: int, noise: float) -> SpectrumSpec:
        """Return ``rank`` ones followed by a |N(0, noise^2)| tail."""
        return cls(SpectrumKind.NOISY_LOW_RANK, length, rank=rank, noise=noise)


def make_spectrum(spec: SpectrumSpec, seed: int = 0) -> Vector:
    """Return the singular values described by ``spec``, largest first."""
    r = spec.length
    match spec.kind:
        case SpectrumKind.POWER_LAW:
            values = np.arange(1, r + 1, dtype=np.float64) ** -spec.alpha
        case SpectrumKind.FLAT:
            values = np.ones(r)
        case SpectrumKind.STEP:
            values = np.full(r, spec.epsilon)
            values[: spec.rank] = 1.0
        case SpectrumKind.NOISY_LOW_RANK:
            rng = np.random.default_rng(seed)
            tail = np.minimum(np.abs(rng.normal(0.0, spec.noise, r - spec.rank)), 1.0)
            values = np.concatenate([np.ones(spec.rank), np.sort(tail)[::-1]])
    values.flags.writeable = False
    return values


def random_orthonormal(rows: int, cols: int, rng: np.random.Generator) -> DenseMatrix:
    """Return a rows x cols matrix with orthonormal columns (cols <= rows)."""
    if cols > rows:
        raise DimensionMismatchError(
            f"Cannot fit {cols} orthonormal columns in dimension {rows}"
        )
    q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
    return q * np.where(np.diag(r) < 0.0, -1.0, 1.0)


def make_matrix_with_spectrum(
    spec: SpectrumSpec, m: int, n: int, seed: int = 0
) -> DenseMatrix:
    """Return Q1 diag(s) Q2^T with seeded random orthonormal Q1 (m x r), Q2 (n x r).

    Raises:
        DimensionMismatchError: if min(m, n) differs from the spectrum length.
    """
    if min(m, n) != spec.length:
        raise DimensionMismatchError(
            f"Spectrum of length {spec.length} for a {m}x{n} matrix"
        )
    rng = np.random.default_rng(seed)
    s = make_spectrum(spec, seed)
    left = random_orthonormal(m, spec.length, rng)
    right = random_orthonormal(n, spec.length, rng)
    return as_matrix((left * s) @ right.T)


def spectral_model(
    layer_dims: Sequence[int], specs: Sequence[SpectrumSpec], seed: int = 0
) -> ModelGraph:
    """Return a dense model whose weights have the given spectra and zero biases.

    Hidden layers use ReLU and the last layer softmax.
    """
    if len(specs) != len(layer_dims) - 1:
        raise ContractViolationError(
            f"{len(specs)} spectra for {len(layer_dims) - 1} layers"
        )
    layers = []
    for index, (spec, (n, m)) in enumerate(
        zip(specs, zip(layer_dims, layer_dims[1:], strict=False), strict=True)
    ):
        last = index == len(specs) - 1
        layers.append(
            DenseLayer(
                w=make_matrix_with_spectrum(spec, m, n, seed + index),
                bias=np.zeros(m),
                activation=Activation.SOFTMAX if last else Activation.RELU,
            )
        )
    return ModelGraph.from_layers(layers)


def make_blobs(spec: BlobSpec) -> tuple[Dataset, Dataset]:
    """Return standardized, stratified (train, test) Gaussian-blob datasets."""
    features, labels = sklearn_make_blobs(
        n_samples=[spec.samples_per_class] * spec.class_count,
        n_features=spec.dimension,
        cluster_std=spec.cluster_std,
        center_box=(-spec.separation, spec.separation),
        random_state=spec.seed,
    )
    x_train, x_test, y_train, y_test = train_test_split(
        features,
        labels,
        test_size=spec.test_fraction,
        stratify=labels,
        random_state=spec.seed,
    )
    scaler = StandardScaler().fit(x_train)
    train = Dataset(scaler.transform(x_train), y_train, spec.class_count)
    test = Dataset(scaler.transform(x_test), y_test, spec.class_count)
    _LOGGER.debug(
        "Generated %d train / %d test blob samples (seed %d)",
        train.sample_count,
        test.sample_count,
        spec.seed,
    )
    return train, test


def build_fixture_model(
    config: ExperimentConfig, seed: int, train: Dataset
) -> ModelGraph:
    """Train the sweep's fixture model for ``seed`` on ``train``."""
    trainer = Trainer(config.train_config(seed))
    model = trainer.fit(train)
    _LOGGER.info(
        "Fixture model for seed %d (%s): training accuracy %.4f",
        seed,
        config.fixture,
        trainer.train_accuracy,
    )
    return model
