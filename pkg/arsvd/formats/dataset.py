"""Delimiter-separated datasets: label first, then feature values."""

from __future__ import annotations

import csv
import logging
import math
from pathlib import Path

import numpy as np

from ..exceptions import (
    ArsvdIOError,
    EmptyDatasetError,
    LabelRangeError,
    NonNumericFieldError,
    RaggedRowsError,
)
from ..models import Dataset

_LOGGER = logging.getLogger(__name__)


def _parse_label(field: str, line: int) -> int:
    try:
        return int(field.strip())
    except ValueError:
        raise NonNumericFieldError(
            f"Line {line}: label {field!r} is not an integer"
        ) from None


def _parse_feature(field: str, line: int, column: int) -> float:
    try:
        value = float(field)
    except ValueError:
        raise NonNumericFieldError(
            f"Line {line}, column {column}: {field!r} is not a number"
        ) from None
    if not math.isfinite(value):
        raise NonNumericFieldError(
            f"Line {line}, column {column}: {field!r} is not finite"
        )
    return value


def load_dataset(
    path: str | Path, class_count: int | None = None, delimiter: str = ","
) -> Dataset:
    """Load samples from ``path``; blank lines are skipped.

    When ``class_count`` is omitted it is inferred as the largest label plus one.

    Raises:
        EmptyDatasetError: if the file holds no samples.
        RaggedRowsError: if rows have differing field counts or no features.
        NonNumericFieldError: if a field does not parse.
        LabelRangeError: if a label falls outside [0, class_count).
    """
    labels: list[int] = []
    rows: list[list[float]] = []
    width: int | None = None
    try:
        with Path(path).open(newline="", encoding="utf-8") as handle:
            for line, fields in enumerate(csv.reader(handle, delimiter=delimiter), 1):
                if not fields or all(not f.strip() for f in fields):
                    continue
                if width is None:
                    width = len(fields)
                    if width < 2:
                        raise RaggedRowsError(
                            f"Line {line}: expected a label and at least one feature"
                        )
                elif len(fields) != width:
                    raise RaggedRowsError(
                        f"Line {line} has {len(fields)} fields, expected {width}"
                    )
                label = _parse_label(fields[0], line)
                if label < 0 or (class_count is not None and label >= class_count):
                    raise LabelRangeError(
                        f"Line {line}: label {label} outside [0, "
                        f"{class_count if class_count is not None else 'inf'})"
                    )
                labels.append(label)
                rows.append(
                    [
                        _parse_feature(value, line, column)
                        for column, value in enumerate(fields[1:], 2)
                    ]
                )
    except OSError as exc:
        raise ArsvdIOError(f"Cannot read dataset {path}: {exc}") from exc

    if not rows:
        raise EmptyDatasetError(f"Dataset {path} holds no samples")
    dataset = Dataset(
        features=np.array(rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
        class_count=class_count if class_count is not None else max(labels) + 1,
    )
    _LOGGER.debug(
        "Loaded %d samples with %d features from %s",
        dataset.sample_count,
        dataset.dimension,
        path,
    )
    return dataset


def write_dataset(dataset: Dataset, path: str | Path, delimiter: str = ",") -> None:
    """Write ``dataset`` so that :func:`load_dataset` reads it back exactly."""
    try:
        with Path(path).open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, delimiter=delimiter, lineterminator="\n")
            for label, row in zip(dataset.labels, dataset.features, strict=True):
                writer.writerow([int(label), *(repr(float(v)) for v in row)])
    except OSError as exc:
        raise ArsvdIOError(f"Cannot write dataset {path}: {exc}") from exc
    _LOGGER.info("Wrote %d samples to %s", dataset.sample_count, path)
