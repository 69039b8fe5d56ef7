"""Adaptive-rank SVD compression of fully connected networks."""

from __future__ import annotations

__version__ = "0.1.0"

from .compress import (
    CostModel,
    LowRankFactors,
    arsvd_compress,
    cost_model,
    fixed_rank_truncate,
    reconstruction_error,
)
from .entropy import (
    EntropyProfile,
    NormalizedSpectrum,
    RankSelection,
    effective_rank,
    entropy_profile,
    normalize_spectrum,
    select_rank,
)
from .exceptions import ArsvdError
from .linalg import FlopMeter, SvdFactors, svd
from .models import CompressionLog, CompressionReport, Dataset, LayerReport
from .network import (
    DenseLayer,
    FactoredLayer,
    ModelGraph,
    compress_model,
    evaluate,
    forward,
    train_mlp,
    truncate_model,
)

__all__ = [
    "ArsvdError",
    "CompressionLog",
    "CompressionReport",
    "CostModel",
    "Dataset",
    "DenseLayer",
    "EntropyProfile",
    "FactoredLayer",
    "FlopMeter",
    "LayerReport",
    "LowRankFactors",
    "ModelGraph",
    "NormalizedSpectrum",
    "RankSelection",
    "SvdFactors",
    "__version__",
    "arsvd_compress",
    "compress_model",
    "cost_model",
    "effective_rank",
    "entropy_profile",
    "evaluate",
    "fixed_rank_truncate",
    "forward",
    "normalize_spectrum",
    "reconstruction_error",
    "select_rank",
    "svd",
    "train_mlp",
    "truncate_model",
]
