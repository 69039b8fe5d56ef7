"""Synthetic fixtures and experiment drivers."""

from __future__ import annotations

from .fixtures import (
    SpectrumKind,
    SpectrumSpec,
    build_fixture_model,
    make_blobs,
    make_matrix_with_spectrum,
    make_spectrum,
    random_orthonormal,
    spectral_model,
)
from .sweep import (
    SweepRow,
    format_sweep,
    matched_budget_check,
    mean_rank,
    run_sweep,
    write_sweep,
)

__all__ = [
    "SpectrumKind",
    "SpectrumSpec",
    "SweepRow",
    "build_fixture_model",
    "format_sweep",
    "make_blobs",
    "make_matrix_with_spectrum",
    "make_spectrum",
    "matched_budget_check",
    "mean_rank",
    "random_orthonormal",
    "run_sweep",
    "spectral_model",
    "write_sweep",
]
