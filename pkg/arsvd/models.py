"""Data models shared across the arsvd package."""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt

from .const import LAYER_KIND_DENSE, RECORD_LAYER, RECORD_TOTALS
from .exceptions import (
    DimensionMismatchError,
    EmptyDatasetError,
    LabelRangeError,
)
from .linalg import DenseMatrix, as_matrix


@dataclass(frozen=True)
class Dataset:
    """Labelled samples; rows of ``features`` are samples."""

    features: DenseMatrix
    labels: npt.NDArray[np.int64]
    class_count: int

    def __post_init__(self) -> None:
        """Validate shapes and the label range."""
        labels = np.asarray(self.labels)
        if labels.size == 0:
            raise EmptyDatasetError()
        object.__setattr__(self, "features", as_matrix(self.features))
        labels = np.array(labels, dtype=np.int64)
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1 or labels.shape[0] != self.features.shape[0]:
            raise DimensionMismatchError(
                f"{self.features.shape[0]} feature rows but {labels.size} labels"
            )
        if self.class_count < 1:
            raise LabelRangeError(
                f"class_count must be positive, got {self.class_count}"
            )
        if labels.min() < 0 or labels.max() >= self.class_count:
            raise LabelRangeError(
                f"Labels must lie in [0, {self.class_count}), "
                f"got range [{labels.min()}, {labels.max()}]"
            )

    @property
    def sample_count(self) -> int:
        """Return the number of samples."""
        return int(self.features.shape[0])

    @property
    def dimension(self) -> int:
        """Return the number of features per sample."""
        return int(self.features.shape[1])


@dataclass(frozen=True)
class CompressionLogEntry:
    """Represents one compressed layer in the compression log."""

    layer_index: int
    m: int
    n: int
    k: int
    tau: float | None


@dataclass(frozen=True)
class CompressionLog:
    """Ordered (m, n, k) log, one entry per compressed layer."""

    entries: tuple[CompressionLogEntry, ...] = ()

    def __iter__(self) -> Iterator[CompressionLogEntry]:
        """Iterate over entries in layer order."""
        return iter(self.entries)

    def __len__(self) -> int:
        """Return the number of entries."""
        return len(self.entries)

    @property
    def ranks(self) -> list[int]:
        """Get the selected rank of every logged layer."""
        return [entry.k for entry in self.entries]


@dataclass(frozen=True)
class LayerReport:
    """Represents the compression outcome for one layer."""

    layer_index: int
    kind: str
    method: str
    m: int
    n: int
    k: int
    tau: float | None
    params_before: int
    params_after: int
    flops_before: int
    flops_after: int
    reconstruction_error: float
    achieved_fraction: float
    effective_rank: float
    inflation: bool
    kept_dense: bool = False
    degenerate: bool = False
    compression_seconds: float = 0.0

    def to_record(self) -> dict[str, Any]:
        """Return the report record with a stable field order."""
        return {
            "record": RECORD_LAYER,
            "layer_index": self.layer_index,
            "kind": self.kind,
            "method": self.method,
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "tau": self.tau,
            "params_before": self.params_before,
            "params_after": self.params_after,
            "flops_before": self.flops_before,
            "flops_after": self.flops_after,
            "reconstruction_error": self.reconstruction_error,
            "achieved_fraction": self.achieved_fraction,
            "effective_rank": self.effective_rank,
            "inflation": self.inflation,
            "kept_dense": self.kept_dense,
            "degenerate": self.degenerate,
            "compression_seconds": self.compression_seconds,
        }

    @classmethod
    def from_record(cls, data: dict[str, Any]) -> LayerReport:
        """Create instance from a report record."""
        tau = data.get("tau")
        return cls(
            layer_index=int(data["layer_index"]),
            kind=str(data.get("kind", LAYER_KIND_DENSE)),
            method=str(data["method"]),
            m=int(data["m"]),
            n=int(data["n"]),
            k=int(data["k"]),
            tau=None if tau is None else float(tau),
            params_before=int(data["params_before"]),
            params_after=int(data["params_after"]),
            flops_before=int(data["flops_before"]),
            flops_after=int(data["flops_after"]),
            reconstruction_error=float(data["reconstruction_error"]),
            achieved_fraction=float(data["achieved_fraction"]),
            effective_rank=float(data["effective_rank"]),
            inflation=bool(data["inflation"]),
            kept_dense=bool(data.get("kept_dense", False)),
            degenerate=bool(data.get("degenerate", False)),
            compression_seconds=float(data.get("compression_seconds", 0.0)),
        )


@dataclass(frozen=True)
class ReportTotals:
    """Model-wide sums of the per-layer report fields."""

    layer_count: int
    params_before: int
    params_after: int
    flops_before: int
    flops_after: int
    reconstruction_error: float
    compression_seconds: float
    inflating_layers: int

    @property
    def param_reduction(self) -> float:
        """Get 1 - params_after / params_before."""
        if self.params_before == 0:
            return 0.0
        return 1.0 - self.params_after / self.params_before

    def to_record(self) -> dict[str, Any]:
        """Return the totals record with a stable field order."""
        return {
            "record": RECORD_TOTALS,
            "layer_count": self.layer_count,
            "params_before": self.params_before,
            "params_after": self.params_after,
            "flops_before": self.flops_before,
            "flops_after": self.flops_after,
            "reconstruction_error": self.reconstruction_error,
            "compression_seconds": self.compression_seconds,
            "inflating_layers": self.inflating_layers,
            "param_reduction": self.param_reduction,
        }

    @classmethod
    def from_record(cls, data: dict[str, Any]) -> ReportTotals:
        """Create instance from a totals record."""
        return cls(
            layer_count=int(data["layer_count"]),
            params_before=int(data["params_before"]),
            params_after=int(data["params_after"]),
            flops_before=int(data["flops_before"]),
            flops_after=int(data["flops_after"]),
            reconstruction_error=float(data["reconstruction_error"]),
            compression_seconds=float(data.get("compression_seconds", 0.0)),
            inflating_layers=int(data.get("inflating_layers", 0)),
        )


@dataclass(frozen=True)
class CompressionReport:
    """Per-layer compression records plus model totals."""

    layers: tuple[LayerReport, ...] = field(default_factory=tuple)

    @property
    def totals(self) -> ReportTotals:
        """Get the column sums of the layer records."""
        return ReportTotals(
            layer_count=len(self.layers),
            params_before=sum(layer.params_before for layer in self.layers),
            params_after=sum(layer.params_after for layer in self.layers),
            flops_before=sum(layer.flops_before for layer in self.layers),
            flops_after=sum(layer.flops_after for layer in self.layers),
            reconstruction_error=sum(
                layer.reconstruction_error for layer in self.layers
            ),
            compression_seconds=sum(
                layer.compression_seconds for layer in self.layers
            ),
            inflating_layers=sum(1 for layer in self.layers if layer.inflation),
        )

    @property
    def ranks(self) -> list[int]:
        """Get the rank of every layer record."""
        return [layer.k for layer in self.layers]

    def to_records(self) -> list[dict[str, Any]]:
        """Return layer records followed by the totals record."""
        return [layer.to_record() for layer in self.layers] + [
            self.totals.to_record()
        ]
