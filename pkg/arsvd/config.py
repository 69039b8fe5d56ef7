"""Configuration schemas for training, fixtures and sweeps."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_CLASS_COUNT,
    DEFAULT_CLUSTER_STD,
    DEFAULT_DIMENSION,
    DEFAULT_EPOCHS,
    DEFAULT_INIT_GAIN,
    DEFAULT_LAYER_DIMS,
    DEFAULT_LEARNING_RATE,
    DEFAULT_SAMPLES_PER_CLASS,
    DEFAULT_SEED,
    DEFAULT_SEPARATION,
    DEFAULT_STEP_EPSILON,
    DEFAULT_STEP_FRACTION,
    DEFAULT_SWEEP_SEEDS,
    DEFAULT_SWEEP_TAUS,
    DEFAULT_TEST_FRACTION,
    DEFAULT_TIMING_REPEATS,
    FIXTURE_STANDARD,
    FIXTURE_STEP,
    MEAN_RANK_BASELINE,
    MIN_TIMING_REPEATS,
)
from .exceptions import ArsvdIOError, ConfigurationError

_LOGGER = logging.getLogger(__name__)

POSITIVE_INT = vol.All(int, vol.Range(min=1))
LAYER_DIMS = vol.All([POSITIVE_INT], vol.Length(min=2))
TAU = vol.All(vol.Coerce(float), vol.Range(min=0.0, max=1.0, min_included=False))

SPECTRAL_STEP_SCHEMA = vol.Schema(
    {
        vol.Optional("fraction", default=DEFAULT_STEP_FRACTION): vol.All(
            vol.Coerce(float), vol.Range(min=0.0, max=1.0, min_included=False)
        ),
        vol.Optional("epsilon", default=DEFAULT_STEP_EPSILON): vol.All(
            vol.Coerce(float), vol.Range(min=0.0)
        ),
    }
)

TRAIN_SCHEMA = vol.Schema(
    {
        vol.Required("layer_dims"): LAYER_DIMS,
        vol.Optional("learning_rate", default=DEFAULT_LEARNING_RATE): vol.All(
            vol.Coerce(float), vol.Range(min=0.0)
        ),
        vol.Optional("batch_size", default=DEFAULT_BATCH_SIZE): POSITIVE_INT,
        vol.Optional("epochs", default=DEFAULT_EPOCHS): vol.All(
            int, vol.Range(min=0)
        ),
        vol.Optional("seed", default=DEFAULT_SEED): int,
        vol.Optional("init_gain", default=DEFAULT_INIT_GAIN): vol.All(
            vol.Coerce(float), vol.Range(min=0.0, min_included=False)
        ),
        vol.Optional("weight_decay", default=0.0): vol.All(
            vol.Coerce(float), vol.Range(min=0.0)
        ),
        vol.Optional("spectral_step", default=None): vol.Any(
            None, SPECTRAL_STEP_SCHEMA
        ),
    }
)

BLOB_SCHEMA = vol.Schema(
    {
        vol.Optional("class_count", default=DEFAULT_CLASS_COUNT): vol.All(
            int, vol.Range(min=2)
        ),
        vol.Optional(
            "samples_per_class", default=DEFAULT_SAMPLES_PER_CLASS
        ): vol.All(int, vol.Range(min=2)),
        vol.Optional("dimension", default=DEFAULT_DIMENSION): POSITIVE_INT,
        vol.Optional("separation", default=DEFAULT_SEPARATION): vol.All(
            vol.Coerce(float), vol.Range(min=0.0, min_included=False)
        ),
        vol.Optional("cluster_std", default=DEFAULT_CLUSTER_STD): vol.All(
            vol.Coerce(float), vol.Range(min=0.0, min_included=False)
        ),
        vol.Optional("test_fraction", default=DEFAULT_TEST_FRACTION): vol.All(
            vol.Coerce(float),
            vol.Range(min=0.0, max=1.0, min_included=False, max_included=False),
        ),
        vol.Optional("seed", default=DEFAULT_SEED): int,
    }
)

EXPERIMENT_SCHEMA = vol.Schema(
    {
        vol.Optional("blobs", default=dict): dict,
        vol.Optional("layer_dims", default=list(DEFAULT_LAYER_DIMS)): LAYER_DIMS,
        vol.Optional("taus", default=list(DEFAULT_SWEEP_TAUS)): vol.All(
            [TAU], vol.Length(min=1)
        ),
        vol.Optional("fixed_ranks", default=[MEAN_RANK_BASELINE]): [
            vol.Any(POSITIVE_INT, MEAN_RANK_BASELINE)
        ],
        vol.Optional("seeds", default=list(DEFAULT_SWEEP_SEEDS)): vol.All(
            [int], vol.Length(min=1)
        ),
        vol.Optional("repetitions", default=DEFAULT_TIMING_REPEATS): vol.All(
            int, vol.Range(min=MIN_TIMING_REPEATS)
        ),
        vol.Optional("fixture", default=FIXTURE_STANDARD): vol.In(
            [FIXTURE_STANDARD, FIXTURE_STEP]
        ),
        vol.Optional("training", default=dict): dict,
        vol.Optional("matched_budget", default=True): bool,
    }
)


def _validate(schema: vol.Schema, data: Any, what: str) -> dict[str, Any]:
    try:
        return schema(data)
    except vol.Invalid as exc:
        raise ConfigurationError(f"Invalid {what}: {exc}") from exc


@dataclass(frozen=True)
class SpectralStep:
    """Per-epoch projection of hidden weights onto a step spectrum."""

    fraction: float = DEFAULT_STEP_FRACTION
    epsilon: float = DEFAULT_STEP_EPSILON


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of the mini-batch SGD trainer."""

    layer_dims: tuple[int, ...]
    learning_rate: float = DEFAULT_LEARNING_RATE
    batch_size: int = DEFAULT_BATCH_SIZE
    epochs: int = DEFAULT_EPOCHS
    seed: int = DEFAULT_SEED
    init_gain: float = DEFAULT_INIT_GAIN
    weight_decay: float = 0.0
    spectral_step: SpectralStep | None = None

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TrainConfig:
        """Create a validated config from plain data."""
        valid = _validate(TRAIN_SCHEMA, data, "training config")
        step = valid["spectral_step"]
        return cls(
            layer_dims=tuple(valid["layer_dims"]),
            learning_rate=valid["learning_rate"],
            batch_size=valid["batch_size"],
            epochs=valid["epochs"],
            seed=valid["seed"],
            init_gain=valid["init_gain"],
            weight_decay=valid["weight_decay"],
            spectral_step=None if step is None else SpectralStep(**step),
        )

    @property
    def input_dim(self) -> int:
        """Get the input width."""
        return self.layer_dims[0]

    @property
    def class_count(self) -> int:
        """Get the number of output classes."""
        return self.layer_dims[-1]


@dataclass(frozen=True)
class BlobSpec:
    """Seeded Gaussian-blob classification task."""

    class_count: int = DEFAULT_CLASS_COUNT
    samples_per_class: int = DEFAULT_SAMPLES_PER_CLASS
    dimension: int = DEFAULT_DIMENSION
    separation: float = DEFAULT_SEPARATION
    cluster_std: float = DEFAULT_CLUSTER_STD
    test_fraction: float = DEFAULT_TEST_FRACTION
    seed: int = DEFAULT_SEED

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> BlobSpec:
        """Create a validated spec from plain data."""
        return cls(**_validate(BLOB_SCHEMA, data, "blob spec"))


@dataclass(frozen=True)
class ExperimentConfig:
    """ARSVD versus fixed-rank sweep over seeds and thresholds."""

    blobs: BlobSpec = field(default_factory=BlobSpec)
    layer_dims: tuple[int, ...] = DEFAULT_LAYER_DIMS
    taus: tuple[float, ...] = DEFAULT_SWEEP_TAUS
    fixed_ranks: tuple[int | str, ...] = (MEAN_RANK_BASELINE,)
    seeds: tuple[int, ...] = DEFAULT_SWEEP_SEEDS
    repetitions: int = DEFAULT_TIMING_REPEATS
    fixture: str = FIXTURE_STANDARD
    training: dict[str, Any] = field(default_factory=dict)
    matched_budget: bool = True

    def __post_init__(self) -> None:
        """Validate chaining between the blob task and the architecture."""
        if self.layer_dims[0] != self.blobs.dimension:
            raise ConfigurationError(
                f"layer_dims starts at {self.layer_dims[0]} but blobs have "
                f"dimension {self.blobs.dimension}"
            )
        if self.layer_dims[-1] != self.blobs.class_count:
            raise ConfigurationError(
                f"layer_dims ends at {self.layer_dims[-1]} but blobs have "
                f"{self.blobs.class_count} classes"
            )
        forbidden = {"layer_dims", "seed"} & set(self.training)
        if forbidden:
            raise ConfigurationError(
                f"training overrides may not set {', '.join(sorted(forbidden))}"
            )

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        """Create a validated config from plain data."""
        valid = _validate(EXPERIMENT_SCHEMA, data, "experiment config")
        return cls(
            blobs=BlobSpec.from_dict(valid["blobs"]),
            layer_dims=tuple(valid["layer_dims"]),
            taus=tuple(valid["taus"]),
            fixed_ranks=tuple(valid["fixed_ranks"]),
            seeds=tuple(valid["seeds"]),
            repetitions=valid["repetitions"],
            fixture=valid["fixture"],
            training=dict(valid["training"]),
            matched_budget=valid["matched_budget"],
        )

    @classmethod
    def from_file(cls, path: str | Path) -> ExperimentConfig:
        """Load a JSON experiment config."""
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ArsvdIOError(f"Cannot read config {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"Config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config {path} must hold a JSON object")
        _LOGGER.debug("Loaded experiment config from %s", path)
        return cls.from_dict(data)

    def train_config(self, seed: int) -> TrainConfig:
        """Build the trainer config of the fixture model for ``seed``."""
        data: dict[str, Any] = {
            "layer_dims": list(self.layer_dims),
            "seed": seed,
            **self.training,
        }
        if self.fixture == FIXTURE_STEP and data.get("spectral_step") is None:
            data["spectral_step"] = {}
        if self.fixture == FIXTURE_STANDARD:
            data["spectral_step"] = None
        return TrainConfig.from_dict(data)
