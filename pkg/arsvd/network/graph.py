"""Model graph, forward passes and whole-model compression."""

from __future__ import annotations

import logging
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..compress import (
    LowRankFactors,
    arsvd_from_svd,
    cost_model,
    reconstruction_error,
    truncate,
)
from ..const import (
    LAYER_KIND_DENSE,
    LAYER_KIND_FACTORED,
    METHOD_ARSVD,
    METHOD_FIXED,
)
from ..entropy import (
    RankSelection,
    effective_rank,
    entropy_profile,
    normalize_spectrum,
)
from ..exceptions import (
    ArsvdError,
    ContractViolationError,
    DimensionMismatchError,
    LayerCompressionError,
)
from ..linalg import FlopMeter, SvdFactors, Vector, as_matrix, as_vector, svd
from ..models import CompressionLog, CompressionLogEntry, CompressionReport, LayerReport
from .layers import DenseLayer, FactoredLayer, Layer

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelGraph:
    """Ordered fully connected layers mapping R^input_dim to class scores."""

    layers: tuple[Layer, ...]
    input_dim: int
    class_count: int

    def __post_init__(self) -> None:
        """Validate that layer dimensions chain."""
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ContractViolationError("A model needs at least one layer")
        if self.layers[0].in_dim != self.input_dim:
            raise DimensionMismatchError(
                f"First layer takes {self.layers[0].in_dim} inputs, "
                f"model declares input_dim {self.input_dim}"
            )
        for index, (left, right) in enumerate(
            zip(self.layers, self.layers[1:], strict=False)
        ):
            if left.out_dim != right.in_dim:
                raise DimensionMismatchError(
                    f"Layer {index} outputs {left.out_dim} values but layer "
                    f"{index + 1} takes {right.in_dim}"
                )
        if self.layers[-1].out_dim != self.class_count:
            raise DimensionMismatchError(
                f"Last layer outputs {self.layers[-1].out_dim} scores, "
                f"model declares {self.class_count} classes"
            )

    @classmethod
    def from_layers(cls, layers: Sequence[Layer]) -> ModelGraph:
        """Create a model whose dimensions are read off its layers."""
        if not layers:
            raise ContractViolationError("A model needs at least one layer")
        return cls(
            layers=tuple(layers),
            input_dim=layers[0].in_dim,
            class_count=layers[-1].out_dim,
        )

    @property
    def depth(self) -> int:
        """Get the number of layers."""
        return len(self.layers)

    @property
    def is_dense(self) -> bool:
        """Get whether every layer is dense."""
        return all(isinstance(layer, DenseLayer) for layer in self.layers)

    @property
    def layer_dims(self) -> list[int]:
        """Get (input_dim, out_dim of each layer)."""
        return [self.input_dim, *(layer.out_dim for layer in self.layers)]

    @property
    def ranks(self) -> list[int | None]:
        """Get k for factored layers and None for dense ones."""
        return [
            layer.k if isinstance(layer, FactoredLayer) else None
            for layer in self.layers
        ]

    @property
    def weight_params(self) -> int:
        """Get sum of weight parameters, mn per dense and k(m + n) per factored."""
        return sum(layer.weight_params for layer in self.layers)

    @property
    def dense_weight_params(self) -> int:
        """Get sum of m n over all layers, whatever their kind."""
        return sum(layer.out_dim * layer.in_dim for layer in self.layers)


def _check_input(model: ModelGraph, x: Vector) -> Vector:
    h = as_vector(x)
    if h.shape[0] != model.input_dim:
        raise DimensionMismatchError(
            f"Input of length {h.shape[0]} for a model taking {model.input_dim}"
        )
    return h


def forward(model: ModelGraph, x: Vector, meter: FlopMeter | None = None) -> Vector:
    """Run one input through every layer, dense or factored."""
    h = _check_input(model, x)
    for index, layer in enumerate(model.layers):
        h = layer.forward(h, meter, f"layer{index}")
    return h


def forward_dense(
    model: ModelGraph, x: Vector, meter: FlopMeter | None = None
) -> Vector:
    """Run one input through an all-dense model."""
    if not model.is_dense:
        raise ContractViolationError("forward_dense requires an all-dense model")
    return forward(model, x, meter)


def predict_scores(model: ModelGraph, features: np.ndarray) -> np.ndarray:
    """Return class scores for every row of ``features``."""
    h = as_matrix(features)
    if h.shape[1] != model.input_dim:
        raise DimensionMismatchError(
            f"Samples have {h.shape[1]} features, model takes {model.input_dim}"
        )
    for layer in model.layers:
        h = layer.forward_batch(h)
    return h


def predict_labels(model: ModelGraph, features: np.ndarray) -> np.ndarray:
    """Return the argmax class for every row of ``features``."""
    return np.argmax(predict_scores(model, features), axis=1)


class CompressionResult(NamedTuple):
    """Compressed model with its (m, n, k) log and cost report."""

    model: ModelGraph
    log: CompressionLog
    report: CompressionReport


RankRule = Callable[[SvdFactors], tuple[LowRankFactors, RankSelection | None]]


def _layer_outcome(
    index: int,
    layer: DenseLayer,
    rule: RankRule,
    method: str,
    tau: float | None,
    no_inflate: bool,
) -> tuple[Layer, CompressionLogEntry, LayerReport]:
    started = time.perf_counter()
    try:
        factors = svd(layer.w)
        low_rank, selection = rule(factors)
        m, n = layer.shape
        costs = cost_model(m, n, low_rank.k)
        error = reconstruction_error(layer.w, low_rank)
    except ArsvdError as err:
        raise LayerCompressionError(index, err) from err
    elapsed = time.perf_counter() - started

    profile = entropy_profile(normalize_spectrum(factors.s))
    achieved = (
        selection.achieved_fraction
        if selection is not None
        else float(profile.fractions()[low_rank.k - 1])
    )
    keep_dense = no_inflate and costs.is_inflating
    if costs.is_inflating:
        _LOGGER.warning(
            "Layer %d (%dx%d) inflates at k=%d: %d factored vs %d dense parameters%s",
            index,
            m,
            n,
            low_rank.k,
            costs.factored_params,
            costs.dense_params,
            ", kept dense" if keep_dense else "",
        )
    degenerate = profile.total <= 0.0
    if degenerate:
        _LOGGER.warning("Layer %d has zero spectral entropy, using k=1", index)

    new_layer: Layer
    if keep_dense:
        new_layer = layer
        params_after = costs.dense_params
        flops_after = costs.dense_flops_per_forward
        error = 0.0
    else:
        new_layer = FactoredLayer(
            factors=low_rank, bias=layer.bias, activation=layer.activation
        )
        params_after = costs.factored_params
        flops_after = costs.factored_flops_per_forward

    _LOGGER.info(
        "Layer %d: %dx%d -> k=%d (%s), %d -> %d parameters",
        index,
        m,
        n,
        low_rank.k,
        method,
        costs.dense_params,
        params_after,
    )
    entry = CompressionLogEntry(layer_index=index, m=m, n=n, k=low_rank.k, tau=tau)
    record = LayerReport(
        layer_index=index,
        kind=LAYER_KIND_DENSE if keep_dense else LAYER_KIND_FACTORED,
        method=method,
        m=m,
        n=n,
        k=low_rank.k,
        tau=tau,
        params_before=costs.dense_params,
        params_after=params_after,
        flops_before=costs.dense_flops_per_forward,
        flops_after=flops_after,
        reconstruction_error=error,
        achieved_fraction=achieved,
        effective_rank=effective_rank(profile),
        inflation=costs.is_inflating,
        kept_dense=keep_dense,
        degenerate=degenerate,
        compression_seconds=elapsed,
    )
    return new_layer, entry, record


def _compress_layers(
    model: ModelGraph,
    rules: Sequence[RankRule | None],
    method: str,
    tau: float | None,
    no_inflate: bool,
    max_workers: int,
) -> CompressionResult:
    jobs = [
        (index, layer, rule)
        for index, (layer, rule) in enumerate(zip(model.layers, rules, strict=True))
        if isinstance(layer, DenseLayer) and rule is not None
    ]
    if not jobs:
        raise ContractViolationError("Model has no dense layer to compress")

    def run(
        job: tuple[int, DenseLayer, RankRule],
    ) -> tuple[Layer, CompressionLogEntry, LayerReport]:
        index, layer, rule = job
        return _layer_outcome(index, layer, rule, method, tau, no_inflate)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            outcomes = list(executor.map(run, jobs))
    else:
        outcomes = [run(job) for job in jobs]

    layers = list(model.layers)
    entries = []
    records = []
    for (index, _, _), (new_layer, entry, record) in zip(jobs, outcomes, strict=True):
        layers[index] = new_layer
        entries.append(entry)
        records.append(record)

    compressed = ModelGraph(
        layers=tuple(layers),
        input_dim=model.input_dim,
        class_count=model.class_count,
    )
    report = CompressionReport(layers=tuple(records))
    totals = report.totals
    if totals.params_after >= totals.params_before:
        _LOGGER.warning(
            "Compression did not reduce parameters: %d -> %d",
            totals.params_before,
            totals.params_after,
        )
    return CompressionResult(compressed, CompressionLog(tuple(entries)), report)


def compress_model(
    model: ModelGraph,
    tau: float,
    *,
    no_inflate: bool = False,
    max_workers: int = 1,
) -> CompressionResult:
    """Replace every dense layer by its ARSVD factorization at threshold ``tau``.

    Biases and activations are carried over unchanged. With ``no_inflate`` a
    layer whose factors would store at least as many parameters as the dense
    weight stays dense and is flagged in the report.

    Raises:
        LayerCompressionError: wrapping the failure of one layer.
    """
    return _compress_layers(
        model,
        [lambda factors: arsvd_from_svd(factors, tau)] * model.depth,
        METHOD_ARSVD,
        tau,
        no_inflate,
        max_workers,
    )


def _fixed_rule(k: int) -> RankRule:
    return lambda factors: (truncate(factors, k), None)


def truncate_model(
    model: ModelGraph,
    ranks: int | Sequence[int | None],
    *,
    no_inflate: bool = False,
    max_workers: int = 1,
) -> CompressionResult:
    """Fixed-rank baseline: truncate every dense layer at a given rank.

    A single ``int`` applies to every layer and is clipped to each layer's
    min(m, n). A sequence gives one rank per layer, ``None`` leaving a layer
    untouched; ranks out of range raise ``LayerCompressionError``.
    """
    rules: list[RankRule | None]
    if isinstance(ranks, int):
        if ranks < 1:
            raise ContractViolationError(f"Fixed rank must be positive, got {ranks}")
        rules = []
        for index, layer in enumerate(model.layers):
            bound = min(layer.shape)
            if ranks > bound:
                _LOGGER.warning(
                    "Fixed rank %d clipped to %d for layer %d", ranks, bound, index
                )
            rules.append(_fixed_rule(min(ranks, bound)))
    else:
        if len(ranks) != model.depth:
            raise ContractViolationError(
                f"{len(ranks)} ranks given for a model with {model.depth} layers"
            )
        rules = [None if k is None else _fixed_rule(k) for k in ranks]
    return _compress_layers(model, rules, METHOD_FIXED, None, no_inflate, max_workers)
