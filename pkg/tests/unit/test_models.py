"""Test data models."""

import numpy as np
import pytest

from arsvd.exceptions import (
    DimensionMismatchError,
    EmptyDatasetError,
    LabelRangeError,
)
from arsvd.models import (
    CompressionLog,
    CompressionLogEntry,
    CompressionReport,
    Dataset,
    LayerReport,
    ReportTotals,
)


def _layer_report(index, k, m=8, n=6, **overrides):
    values = {
        "layer_index": index,
        "kind": "factored",
        "method": "arsvd",
        "m": m,
        "n": n,
        "k": k,
        "tau": 0.9,
        "params_before": m * n,
        "params_after": k * (m + n),
        "flops_before": m * n,
        "flops_after": k * n + k + k * m,
        "reconstruction_error": 0.25 * index,
        "achieved_fraction": 0.93,
        "effective_rank": 3.5,
        "inflation": k * (m + n) >= m * n,
    }
    values.update(overrides)
    return LayerReport(**values)


class TestDataset:
    """Test Dataset model."""

    def test_create_dataset(self, sample_dataset):
        """Test creating a dataset."""
        assert sample_dataset.sample_count == 2
        assert sample_dataset.dimension == 2
        assert sample_dataset.labels.dtype == np.int64
        assert not sample_dataset.features.flags.writeable

    def test_empty_dataset(self):
        """Test that a dataset without samples is rejected."""
        with pytest.raises(EmptyDatasetError):
            Dataset(features=np.zeros((0, 2)), labels=np.array([]), class_count=2)

    def test_label_count_mismatch(self):
        """Test that labels must match feature rows."""
        with pytest.raises(DimensionMismatchError):
            Dataset(features=np.zeros((3, 2)), labels=np.array([0, 1]), class_count=2)

    def test_label_out_of_range(self):
        """Test that labels must lie in [0, class_count)."""
        with pytest.raises(LabelRangeError, match=r"\[0, 3\)"):
            Dataset(features=np.zeros((2, 2)), labels=np.array([0, 7]), class_count=3)

    def test_negative_label(self):
        """Test that negative labels are rejected."""
        with pytest.raises(LabelRangeError):
            Dataset(features=np.zeros((1, 2)), labels=np.array([-1]), class_count=3)


class TestCompressionLog:
    """Test CompressionLog model."""

    def test_ranks(self):
        """Test that ranks follow entry order."""
        log = CompressionLog(
            (
                CompressionLogEntry(layer_index=0, m=32, n=64, k=5, tau=0.9),
                CompressionLogEntry(layer_index=1, m=10, n=32, k=3, tau=0.9),
            )
        )

        assert len(log) == 2
        assert log.ranks == [5, 3]
        assert [entry.layer_index for entry in log] == [0, 1]


class TestLayerReport:
    """Test LayerReport model."""

    def test_record_field_order(self):
        """Test the record starts with its kind and keeps a stable order."""
        record = _layer_report(0, 2).to_record()

        assert list(record)[:4] == ["record", "layer_index", "kind", "method"]
        assert list(record)[4:7] == ["m", "n", "k"]
        assert record["record"] == "layer"

    def test_from_record(self):
        """Test that a record rebuilds an equal report."""
        report = _layer_report(1, 3, kept_dense=True, compression_seconds=0.5)

        assert LayerReport.from_record(report.to_record()) == report

    def test_from_record_defaults(self):
        """Test optional fields default when absent."""
        record = _layer_report(0, 2).to_record()
        del record["kept_dense"], record["degenerate"], record["compression_seconds"]

        report = LayerReport.from_record(record)

        assert report.kept_dense is False
        assert report.compression_seconds == 0.0

    def test_from_record_missing_field(self):
        """Test that a missing required field raises KeyError."""
        record = _layer_report(0, 2).to_record()
        del record["m"]

        with pytest.raises(KeyError):
            LayerReport.from_record(record)


class TestCompressionReport:
    """Test CompressionReport model."""

    def test_totals_are_column_sums(self):
        """Test that totals sum the layer fields."""
        report = CompressionReport((_layer_report(0, 2), _layer_report(1, 6)))
        totals = report.totals

        assert totals.layer_count == 2
        assert totals.params_before == 96
        assert totals.params_after == 2 * 14 + 6 * 14
        assert totals.flops_after == (12 + 2 + 16) + (36 + 6 + 48)
        assert totals.reconstruction_error == pytest.approx(0.25)
        assert totals.inflating_layers == 1
        assert report.ranks == [2, 6]

    def test_to_records(self):
        """Test layer records come first and totals last."""
        records = CompressionReport((_layer_report(0, 2),)).to_records()

        assert [r["record"] for r in records] == ["layer", "totals"]
        assert records[-1]["param_reduction"] == pytest.approx(1 - 28 / 48)

    def test_totals_round_trip(self):
        """Test the totals record rebuilds equal totals."""
        totals = CompressionReport((_layer_report(0, 2),)).totals

        assert ReportTotals.from_record(totals.to_record()) == totals

    def test_empty_report_reduction(self):
        """Test an empty report reports no reduction."""
        assert CompressionReport().totals.param_reduction == 0.0
