"""File formats: tensor container, model manifest, datasets and reports."""

from __future__ import annotations

from .container import (
    decode_container,
    encode_container,
    read_container,
    write_container,
)
from .dataset import load_dataset, write_dataset
from .manifest import load_model, manifest_path_for, save_model
from .report import compare_reports, emit_report, format_comparison, read_report

__all__ = [
    "compare_reports",
    "decode_container",
    "emit_report",
    "encode_container",
    "format_comparison",
    "load_dataset",
    "load_model",
    "manifest_path_for",
    "read_container",
    "read_report",
    "save_model",
    "write_container",
    "write_dataset",
]
