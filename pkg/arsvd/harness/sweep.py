"""ARSVD versus fixed-rank sweeps over seeds and thresholds."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from ..config import ExperimentConfig
from ..const import MEAN_RANK_BASELINE, METHOD_ARSVD, METHOD_DENSE, METHOD_FIXED
from ..exceptions import (
    ArsvdError,
    ArsvdIOError,
    ReportFormatError,
    ReportWriteError,
    SweepPointError,
)
from ..network.graph import (
    CompressionResult,
    ModelGraph,
    compress_model,
    truncate_model,
)
from ..network.layers import FactoredLayer
from ..network.metrics import Metrics, evaluate
from ..utils import format_table
from .fixtures import build_fixture_model, make_blobs

_LOGGER = logging.getLogger(__name__)

SWEEP_HEADER = (
    "seed",
    "method",
    "tau",
    "fixed_rank",
    "ranks",
    "params",
    "param_reduction",
    "accuracy",
    "macro_f1",
    "seconds_per_sample",
    "flops_per_sample",
)

SWEEP_DELTA_HEADER = (
    "seed",
    "method",
    "tau",
    "fixed_rank",
    "params",
    "param_reduction",
    "accuracy_delta",
    "macro_f1_delta",
    "seconds_per_sample_delta",
    "flops_delta",
)


@dataclass(frozen=True)
class SweepRow:
    """One evaluated configuration of a sweep."""

    seed: int
    method: str
    tau: float | None
    fixed_rank: int | None
    ranks: tuple[int | None, ...]
    params: int
    param_reduction: float
    accuracy: float
    macro_f1: float
    seconds_per_sample: float
    flops_per_sample: int
    matched_budget: bool | None = None

    def to_record(self) -> dict[str, Any]:
        """Return the row as a JSON-ready record."""
        return {
            "seed": self.seed,
            "method": self.method,
            "tau": self.tau,
            "fixed_rank": self.fixed_rank,
            "ranks": list(self.ranks),
            "params": self.params,
            "param_reduction": self.param_reduction,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "seconds_per_sample": self.seconds_per_sample,
            "flops_per_sample": self.flops_per_sample,
            "matched_budget": self.matched_budget,
        }

    @classmethod
    def from_record(cls, data: dict[str, Any]) -> SweepRow:
        """Create instance from a sweep record."""
        tau = data.get("tau")
        fixed_rank = data.get("fixed_rank")
        matched = data.get("matched_budget")
        return cls(
            seed=int(data["seed"]),
            method=str(data["method"]),
            tau=None if tau is None else float(tau),
            fixed_rank=None if fixed_rank is None else int(fixed_rank),
            ranks=tuple(None if k is None else int(k) for k in data["ranks"]),
            params=int(data["params"]),
            param_reduction=float(data["param_reduction"]),
            accuracy=float(data["accuracy"]),
            macro_f1=float(data["macro_f1"]),
            seconds_per_sample=float(data["seconds_per_sample"]),
            flops_per_sample=int(data["flops_per_sample"]),
            matched_budget=None if matched is None else bool(matched),
        )

    def cells(self) -> tuple:
        """Return the row in SWEEP_HEADER order."""
        return (
            self.seed,
            self.method,
            self.tau,
            self.fixed_rank,
            self.ranks,
            self.params,
            self.param_reduction,
            self.accuracy,
            self.macro_f1,
            self.seconds_per_sample,
            self.flops_per_sample,
        )


def mean_rank(ranks: list[int]) -> int:
    """Return the mean rank rounded half up, at least 1."""
    return max(1, math.floor(sum(ranks) / len(ranks) + 0.5))


def matched_budget_check(model: ModelGraph, result: CompressionResult) -> bool:
    """Return whether fixed-rank truncation at ARSVD's ranks rebuilds ``result``.

    Layers kept dense by the compression are left untouched in the rebuild.
    """
    ranks = [
        layer.k if isinstance(layer, FactoredLayer) else None
        for layer in result.model.layers
    ]
    if all(k is None for k in ranks):
        return True
    rebuilt = truncate_model(model, ranks).model
    for ours, theirs in zip(result.model.layers, rebuilt.layers, strict=True):
        if isinstance(ours, FactoredLayer) != isinstance(theirs, FactoredLayer):
            return False
        if isinstance(ours, FactoredLayer) and isinstance(theirs, FactoredLayer):
            same = (
                np.array_equal(ours.u, theirs.u)
                and np.array_equal(ours.s, theirs.s)
                and np.array_equal(ours.vt, theirs.vt)
                and np.array_equal(ours.bias, theirs.bias)
            )
            if not same:
                return False
    return True


def _row(
    seed: int,
    method: str,
    model: ModelGraph,
    dense_params: int,
    metrics: Metrics,
    tau: float | None = None,
    fixed_rank: int | None = None,
    matched_budget: bool | None = None,
) -> SweepRow:
    return SweepRow(
        seed=seed,
        method=method,
        tau=tau,
        fixed_rank=fixed_rank,
        ranks=tuple(model.ranks),
        params=model.weight_params,
        param_reduction=1.0 - model.weight_params / dense_params,
        accuracy=metrics.accuracy,
        macro_f1=metrics.macro_f1,
        seconds_per_sample=metrics.seconds_per_sample,
        flops_per_sample=metrics.flops_per_sample,
        matched_budget=matched_budget,
    )


def run_sweep(config: ExperimentConfig) -> list[SweepRow]:
    """Train, compress and evaluate every (seed, tau, fixed rank) coordinate.

    Per seed the rows are: the dense model, one ARSVD row per tau, one fixed-rank
    row per integer rank and, for the "mean" baseline, one fixed-rank row per tau
    at the rounded mean of that tau's ARSVD ranks.

    Raises:
        SweepPointError: wrapping the failure of one coordinate.
    """
    rows: list[SweepRow] = []
    for seed in config.seeds:
        coordinate = f"seed={seed}"
        try:
            train, test = make_blobs(replace(config.blobs, seed=seed))
            model = build_fixture_model(config, seed, train)
            dense_metrics = evaluate(model, test, config.repetitions)
        except ArsvdError as err:
            raise SweepPointError(coordinate, err) from err
        dense_params = model.weight_params
        rows.append(_row(seed, METHOD_DENSE, model, dense_params, dense_metrics))

        arsvd_ranks: dict[float, list[int]] = {}
        for tau in config.taus:
            point = f"{coordinate} tau={tau}"
            try:
                result = compress_model(model, tau)
                metrics = evaluate(result.model, test, config.repetitions)
            except ArsvdError as err:
                raise SweepPointError(point, err) from err
            matched = (
                matched_budget_check(model, result) if config.matched_budget else None
            )
            if matched is False:
                _LOGGER.error("Matched-budget rebuild differs at %s", point)
            arsvd_ranks[tau] = result.log.ranks
            rows.append(
                _row(
                    seed,
                    METHOD_ARSVD,
                    result.model,
                    dense_params,
                    metrics,
                    tau=tau,
                    matched_budget=matched,
                )
            )

        for fixed in config.fixed_ranks:
            targets: list[tuple[float | None, int]]
            if fixed == MEAN_RANK_BASELINE:
                targets = [(tau, mean_rank(arsvd_ranks[tau])) for tau in config.taus]
            else:
                targets = [(None, int(fixed))]
            for tau, k in targets:
                point = f"{coordinate} fixed_rank={k}"
                try:
                    result = truncate_model(model, k)
                    metrics = evaluate(result.model, test, config.repetitions)
                except ArsvdError as err:
                    raise SweepPointError(point, err) from err
                rows.append(
                    _row(
                        seed,
                        METHOD_FIXED,
                        result.model,
                        dense_params,
                        metrics,
                        tau=tau,
                        fixed_rank=k,
                    )
                )
        _LOGGER.info("Sweep seed %d done: %d rows so far", seed, len(rows))
    return rows


def write_sweep(rows: list[SweepRow], path: str | Path) -> None:
    """Write sweep rows as JSON Lines."""
    text = "".join(json.dumps(row.to_record()) + "\n" for row in rows)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ReportWriteError(f"Cannot write sweep {path}: {exc}") from exc
    _LOGGER.info("Wrote %d sweep rows to %s", len(rows), path)


def format_sweep(rows: list[SweepRow]) -> str:
    """Return sweep rows as tab-separated text."""
    return format_table(SWEEP_HEADER, (row.cells() for row in rows))


def parse_sweep(text: str, source: str = "<sweep>") -> list[SweepRow]:
    """Parse JSON Lines sweep text written by :func:`write_sweep`."""
    rows: list[SweepRow] = []
    for number, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append(SweepRow.from_record(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ReportFormatError(f"{source}:{number}: {exc}") from exc
    if not rows:
        raise ReportFormatError(f"{source}: no sweep rows")
    return rows


def read_sweep(path: str | Path) -> list[SweepRow]:
    """Read sweep rows from a JSON Lines file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ArsvdIOError(f"Cannot read sweep {path}: {exc}") from exc
    return parse_sweep(text, str(path))


@dataclass(frozen=True)
class SweepDelta:
    """A compressed sweep row measured against the dense row of its seed."""

    row: SweepRow
    dense: SweepRow

    @property
    def accuracy_delta(self) -> float:
        """Get accuracy minus dense accuracy."""
        return self.row.accuracy - self.dense.accuracy

    @property
    def macro_f1_delta(self) -> float:
        """Get macro-F1 minus dense macro-F1."""
        return self.row.macro_f1 - self.dense.macro_f1

    @property
    def seconds_per_sample_delta(self) -> float:
        """Get seconds per sample minus the dense time."""
        return self.row.seconds_per_sample - self.dense.seconds_per_sample

    @property
    def flops_delta(self) -> int:
        """Get FLOPs per sample minus dense FLOPs per sample."""
        return self.row.flops_per_sample - self.dense.flops_per_sample

    def cells(self) -> tuple:
        """Return the delta in SWEEP_DELTA_HEADER order."""
        return (
            self.row.seed,
            self.row.method,
            self.row.tau,
            self.row.fixed_rank,
            self.row.params,
            self.row.param_reduction,
            self.accuracy_delta,
            self.macro_f1_delta,
            self.seconds_per_sample_delta,
            self.flops_delta,
        )


def compare_sweep(rows: list[SweepRow]) -> list[SweepDelta]:
    """Pair every compressed row with the dense row of the same seed.

    Raises:
        ReportFormatError: if a seed has no dense row.
    """
    dense = {row.seed: row for row in rows if row.method == METHOD_DENSE}
    deltas = []
    for row in rows:
        if row.method == METHOD_DENSE:
            continue
        if row.seed not in dense:
            raise ReportFormatError(f"Sweep has no dense row for seed {row.seed}")
        deltas.append(SweepDelta(row=row, dense=dense[row.seed]))
    return deltas


def format_sweep_comparison(deltas: list[SweepDelta]) -> str:
    """Return sweep deltas as tab-separated, plot-ready text."""
    return format_table(SWEEP_DELTA_HEADER, (delta.cells() for delta in deltas))
