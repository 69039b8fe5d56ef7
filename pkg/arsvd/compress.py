"""Per-matrix ARSVD compression, fixed-rank truncation and cost accounting."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .entropy import RankSelection, entropy_profile, normalize_spectrum, select_rank
from .exceptions import ContractViolationError, DimensionMismatchError
from .linalg import DenseMatrix, SvdFactors, Vector, as_matrix, frobenius_norm, svd

_LOGGER = logging.getLogger(__name__)


def _readonly_copy(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64, order="C")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class LowRankFactors:
    """Rank-k factors (U_k, s_k, V_k^T) of an m x n matrix."""

    u: DenseMatrix
    s: Vector
    vt: DenseMatrix

    def __post_init__(self) -> None:
        """Validate factor shapes and the spectrum ordering."""
        if self.u.ndim != 2 or self.s.ndim != 1 or self.vt.ndim != 2:
            raise DimensionMismatchError("Factors must be matrix, vector, matrix")
        k = self.s.shape[0]
        if self.u.shape[1] != k or self.vt.shape[0] != k:
            raise DimensionMismatchError(
                f"Factor ranks disagree: u has {self.u.shape[1]} columns, "
                f"s has {k} values, vt has {self.vt.shape[0]} rows"
            )
        if k < 1 or k > min(self.u.shape[0], self.vt.shape[1]):
            raise ContractViolationError(
                f"Rank {k} outside [1, {min(self.u.shape[0], self.vt.shape[1])}]"
            )
        if (self.s < 0.0).any() or (np.diff(self.s) > 0.0).any():
            raise ContractViolationError("s_k must be nonnegative and non-increasing")

    @property
    def k(self) -> int:
        """Return the retained rank."""
        return int(self.s.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        """Return the (m, n) shape of the approximated matrix."""
        return int(self.u.shape[0]), int(self.vt.shape[1])

    @property
    def param_count(self) -> int:
        """Return stored scalars, k(m + n) plus the k singular values."""
        m, n = self.shape
        return self.k * (m + n) + self.k

    def materialize(self) -> DenseMatrix:
        """Return U_k diag(s_k) V_k^T; used only for error reporting."""
        return (self.u * self.s) @ self.vt


@dataclass(frozen=True)
class CostModel:
    """Parameter and per-forward multiply-add counts, dense vs factored."""

    m: int
    n: int
    k: int
    dense_params: int
    factored_params: int
    dense_flops_per_forward: int
    factored_flops_per_forward: int

    @property
    def is_inflating(self) -> bool:
        """Return True when k(m + n) >= mn."""
        return self.factored_params >= self.dense_params

    @property
    def param_reduction(self) -> float:
        """Return 1 - factored / dense parameters."""
        return 1.0 - self.factored_params / self.dense_params


def cost_model(m: int, n: int, k: int) -> CostModel:
    """Return the cost of an m x n layer kept dense or factored at rank k."""
    if m < 1 or n < 1 or k < 1 or k > min(m, n):
        raise ContractViolationError(f"Invalid cost model shape m={m}, n={n}, k={k}")
    return CostModel(
        m=m,
        n=n,
        k=k,
        dense_params=m * n,
        factored_params=k * (m + n),
        dense_flops_per_forward=m * n,
        factored_flops_per_forward=k * n + k + k * m,
    )


def truncate(factors: SvdFactors, k: int) -> LowRankFactors:
    """Keep the leading k singular triplets of ``factors``."""
    if not 1 <= k <= factors.rank_bound:
        raise ContractViolationError(
            f"Rank {k} outside [1, {factors.rank_bound}] for a "
            f"{factors.shape[0]}x{factors.shape[1]} matrix"
        )
    return LowRankFactors(
        u=_readonly_copy(factors.u[:, :k]),
        s=_readonly_copy(factors.s[:k]),
        vt=_readonly_copy(factors.vt[:k, :]),
    )


def arsvd_from_svd(
    factors: SvdFactors, tau: float, log_base: float | None = None
) -> tuple[LowRankFactors, RankSelection]:
    """Select k by the entropy threshold and truncate an existing SVD."""
    selection = select_rank(
        entropy_profile(normalize_spectrum(factors.s), log_base), tau
    )
    if selection.degenerate:
        _LOGGER.debug(
            "Zero spectral entropy for %dx%d matrix, keeping rank 1", *factors.shape
        )
    return truncate(factors, selection.k), selection


def arsvd_compress(w: DenseMatrix, tau: float) -> tuple[LowRankFactors, RankSelection]:
    """Compress ``w`` to the smallest rank retaining tau of its spectral entropy.

    Raises:
        ContractViolationError: if tau is outside (0, 1] or ``w`` is not finite.
        SvdConvergenceError: if the SVD does not converge.
    """
    return arsvd_from_svd(svd(w), tau)


def fixed_rank_truncate(w: DenseMatrix, k: int) -> LowRankFactors:
    """Return the leading-k SVD truncation of ``w``."""
    a = as_matrix(w)
    if not 1 <= k <= min(a.shape):
        raise ContractViolationError(
            f"Rank {k} outside [1, {min(a.shape)}] for a {a.shape[0]}x{a.shape[1]} "
            "matrix"
        )
    return truncate(svd(a), k)


def reconstruction_error(w: DenseMatrix, factors: LowRankFactors) -> float:
    """Return ||U_k diag(s_k) V_k^T - W||_F."""
    a = as_matrix(w)
    if factors.shape != a.shape:
        raise DimensionMismatchError(
            f"Factors approximate a {factors.shape[0]}x{factors.shape[1]} matrix, "
            f"got {a.shape[0]}x{a.shape[1]}"
        )
    return frobenius_norm(factors.materialize() - a)
