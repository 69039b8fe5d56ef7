"""Utilities for the arsvd package."""

from __future__ import annotations

import statistics
import time
from collections.abc import Callable, Iterable, Sequence
from typing import Any

from .exceptions import ConfigurationError


def median_seconds(
    func: Callable[[], Any], repeats: int, warmup: int = 1
) -> float:
    """Return the median monotonic wall time of ``repeats`` calls to ``func``."""
    for _ in range(warmup):
        func()
    samples = []
    for _ in range(repeats):
        started = time.perf_counter()
        func()
        samples.append(time.perf_counter() - started)
    return statistics.median(samples)


def parse_int_list(text: str) -> list[int]:
    """Parse "64,32,10" into [64, 32, 10]."""
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigurationError(
            f"Expected comma-separated integers: {text!r}"
        ) from exc
    if not values:
        raise ConfigurationError("Expected at least one integer")
    return values


def format_value(value: Any) -> str:
    """Format a table cell."""
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def format_table(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Format rows as tab-separated text under ``header``."""
    lines = ["\t".join(header)]
    lines.extend("\t".join(format_value(cell) for cell in row) for row in rows)
    return "\n".join(lines)


def format_count(value: int) -> str:
    """Format a parameter or FLOP count with thousands separators."""
    return f"{value:,}"
