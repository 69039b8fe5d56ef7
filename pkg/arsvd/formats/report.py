"""JSON Lines compression reports: emission, reading and comparison."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

from ..const import RECORD_LAYER, RECORD_TOTALS
from ..exceptions import (
    ArsvdIOError,
    ContractViolationError,
    ReportFormatError,
    ReportWriteError,
)
from ..models import CompressionReport, LayerReport, ReportTotals
from ..utils import format_table

_LOGGER = logging.getLogger(__name__)

COMPARISON_HEADER = (
    "layer",
    "k_a",
    "k_b",
    "params_a",
    "params_b",
    "params_delta",
    "flops_a",
    "flops_b",
    "flops_delta",
    "error_a",
    "error_b",
)


def format_report(report: CompressionReport) -> str:
    """Return the report as JSON Lines text."""
    return "".join(json.dumps(record) + "\n" for record in report.to_records())


def emit_report(report: CompressionReport, path: str | Path) -> None:
    """Write one record per layer followed by the totals record."""
    try:
        Path(path).write_text(format_report(report), encoding="utf-8")
    except OSError as exc:
        raise ReportWriteError(f"Cannot write report {path}: {exc}") from exc
    _LOGGER.info("Wrote %d-layer report to %s", len(report.layers), path)


def parse_report(text: str, source: str = "<report>") -> CompressionReport:
    """Parse JSON Lines report text and check the totals record."""
    layers: list[LayerReport] = []
    totals: ReportTotals | None = None
    for number, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if totals is not None:
            raise ReportFormatError(f"{source}:{number}: record after the totals")
        try:
            record = json.loads(line)
            kind = record["record"]
            if kind == RECORD_LAYER:
                layers.append(LayerReport.from_record(record))
            elif kind == RECORD_TOTALS:
                totals = ReportTotals.from_record(record)
            else:
                raise ReportFormatError(f"{source}:{number}: unknown record {kind!r}")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ReportFormatError(f"{source}:{number}: {exc}") from exc

    if totals is None:
        raise ReportFormatError(f"{source}: missing totals record")
    report = CompressionReport(layers=tuple(layers))
    expected = report.totals
    counts = (
        "layer_count",
        "params_before",
        "params_after",
        "flops_before",
        "flops_after",
    )
    for name in counts:
        if getattr(totals, name) != getattr(expected, name):
            raise ReportFormatError(
                f"{source}: totals {name}={getattr(totals, name)} but layers sum to "
                f"{getattr(expected, name)}"
            )
    if not math.isclose(
        totals.reconstruction_error, expected.reconstruction_error, rel_tol=1e-9
    ):
        raise ReportFormatError(f"{source}: totals reconstruction_error mismatch")
    return report


def read_report(path: str | Path) -> CompressionReport:
    """Read a report written by :func:`emit_report`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ArsvdIOError(f"Cannot read report {path}: {exc}") from exc
    return parse_report(text, str(path))


@dataclass(frozen=True)
class ComparisonRow:
    """Side-by-side figures of one layer (or the totals) in two reports."""

    layer: str
    k_a: int | None
    k_b: int | None
    params_a: int
    params_b: int
    flops_a: int
    flops_b: int
    error_a: float
    error_b: float

    @property
    def params_delta(self) -> int:
        """Get params_b - params_a."""
        return self.params_b - self.params_a

    @property
    def flops_delta(self) -> int:
        """Get flops_b - flops_a."""
        return self.flops_b - self.flops_a

    def cells(self) -> tuple:
        """Return the row in COMPARISON_HEADER order."""
        return (
            self.layer,
            self.k_a,
            self.k_b,
            self.params_a,
            self.params_b,
            self.params_delta,
            self.flops_a,
            self.flops_b,
            self.flops_delta,
            self.error_a,
            self.error_b,
        )


def compare_reports(a: CompressionReport, b: CompressionReport) -> list[ComparisonRow]:
    """Pair layer records by index and append a totals row."""
    index_a = {layer.layer_index: layer for layer in a.layers}
    index_b = {layer.layer_index: layer for layer in b.layers}
    if index_a.keys() != index_b.keys():
        raise ContractViolationError(
            f"Reports cover different layers: {sorted(index_a)} vs {sorted(index_b)}"
        )
    rows = [
        ComparisonRow(
            layer=str(index),
            k_a=index_a[index].k,
            k_b=index_b[index].k,
            params_a=index_a[index].params_after,
            params_b=index_b[index].params_after,
            flops_a=index_a[index].flops_after,
            flops_b=index_b[index].flops_after,
            error_a=index_a[index].reconstruction_error,
            error_b=index_b[index].reconstruction_error,
        )
        for index in sorted(index_a)
    ]
    totals_a, totals_b = a.totals, b.totals
    rows.append(
        ComparisonRow(
            layer=RECORD_TOTALS,
            k_a=None,
            k_b=None,
            params_a=totals_a.params_after,
            params_b=totals_b.params_after,
            flops_a=totals_a.flops_after,
            flops_b=totals_b.flops_after,
            error_a=totals_a.reconstruction_error,
            error_b=totals_b.reconstruction_error,
        )
    )
    return rows


def format_comparison(rows: list[ComparisonRow]) -> str:
    """Return comparison rows as tab-separated, plot-ready text."""
    return format_table(COMPARISON_HEADER, (row.cells() for row in rows))
