"""Dense real linear algebra: validated storage, products, norms and SVD."""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np
import numpy.typing as npt

from .const import SVD_MAX_SWEEPS, SVD_NEGLIGIBLE_FACTOR, SVD_ROTATION_TOL
from .exceptions import (
    ContractViolationError,
    DimensionMismatchError,
    SvdConvergenceError,
)

_LOGGER = logging.getLogger(__name__)

DenseMatrix = npt.NDArray[np.float64]
Vector = npt.NDArray[np.float64]

_EPS = float(np.finfo(np.float64).eps)


def _shape(a: np.ndarray) -> str:
    return "x".join(str(d) for d in a.shape) or "scalar"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _as_float_array(data: Any, ndim: int, kind: str) -> np.ndarray:
    try:
        arr = np.array(data, dtype=np.float64, order="C")
    except (TypeError, ValueError) as exc:
        raise ContractViolationError(f"Cannot build a {kind}: {exc}") from exc
    if arr.ndim != ndim:
        raise ContractViolationError(
            f"Expected a {kind} with {ndim} dimension(s), got shape {_shape(arr)}"
        )
    if arr.size == 0:
        raise ContractViolationError(f"A {kind} must be non-empty")
    if not np.isfinite(arr).all():
        raise ContractViolationError(f"{kind.capitalize()} entries must be finite")
    return _frozen(arr)


def as_matrix(data: Any) -> DenseMatrix:
    """Return a read-only float64 copy of ``data`` checked to be a finite matrix."""
    return _as_float_array(data, 2, "matrix")


def as_vector(data: Any) -> Vector:
    """Return a read-only float64 copy of ``data`` checked to be a finite vector."""
    return _as_float_array(data, 1, "vector")


def dense_matrix(rows: int, cols: int, data: Iterable[float]) -> DenseMatrix:
    """Build a matrix from row-major flat data."""
    flat = np.fromiter(data, dtype=np.float64)
    if rows <= 0 or cols <= 0:
        raise ContractViolationError(
            f"Matrix shape must be positive, got {rows}x{cols}"
        )
    if flat.size != rows * cols:
        raise ContractViolationError(
            f"Row-major data has {flat.size} entries, expected {rows}x{cols}"
        )
    return as_matrix(flat.reshape(rows, cols))


@dataclass
class FlopMeter:
    """Counts multiply-adds of matrix products, element-wise work separately."""

    multiply_adds: int = 0
    elementwise: int = 0
    per_layer: dict[str, int] = field(default_factory=dict)

    def add(self, count: int, label: str | None = None) -> None:
        """Record ``count`` multiply-adds, optionally against a layer label."""
        self.multiply_adds += count
        if label is not None:
            self.per_layer[label] = self.per_layer.get(label, 0) + count

    def add_elementwise(self, count: int) -> None:
        """Record bias additions and activation work."""
        self.elementwise += count

    def reset(self) -> None:
        """Zero every counter."""
        self.multiply_adds = 0
        self.elementwise = 0
        self.per_layer.clear()


def matvec(
    a: DenseMatrix,
    x: Vector,
    meter: FlopMeter | None = None,
    label: str | None = None,
) -> Vector:
    """Return ``a @ x``; records rows*cols multiply-adds on ``meter``."""
    if a.ndim != 2 or x.ndim != 1 or a.shape[1] != x.shape[0]:
        raise DimensionMismatchError(
            f"matvec: matrix {_shape(a)} does not accept vector {_shape(x)}"
        )
    if meter is not None:
        meter.add(a.shape[0] * a.shape[1], label)
    return a @ x


def matmul(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Return the matrix product ``a @ b``."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionMismatchError(
            f"matmul: left {_shape(a)} does not chain with right {_shape(b)}"
        )
    return a @ b


def frobenius_norm(a: DenseMatrix) -> float:
    """Return the Frobenius norm of ``a``."""
    return float(np.linalg.norm(a))


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``w = u @ diag(s) @ vt`` with s non-increasing."""

    u: DenseMatrix
    s: Vector
    vt: DenseMatrix

    @property
    def rank_bound(self) -> int:
        """Return r = min(m, n)."""
        return int(self.s.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        """Return the (m, n) shape of the factored matrix."""
        return int(self.u.shape[0]), int(self.vt.shape[1])

    def reconstruct(self) -> DenseMatrix:
        """Return ``u @ diag(s) @ vt``."""
        return (self.u * self.s) @ self.vt


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Return one sweep of disjoint column pairs covering every pair once."""
    players = list(range(n if n % 2 == 0 else n + 1))
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = [
            (players[i], players[size - 1 - i])
            for i in range(size // 2)
            if players[i] < n and players[size - 1 - i] < n
        ]
        p = np.array([min(pair) for pair in pairs], dtype=np.intp)
        q = np.array([max(pair) for pair in pairs], dtype=np.intp)
        rounds.append((p, q))
        players = [players[0], players[-1], *players[1:-1]]
    return tuple(rounds)


def _complete_basis(basis: np.ndarray, count: int) -> np.ndarray:
    """Return ``count`` orthonormal columns orthogonal to ``basis``."""
    m, g = basis.shape
    q, _ = np.linalg.qr(np.hstack([basis, np.eye(m)]))
    return q[:, g : g + count]


def _one_sided_jacobi(
    a: np.ndarray, tol: float, max_sweeps: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hestenes one-sided Jacobi on a tall matrix (m >= n)."""
    m, n = a.shape
    work = np.array(a, dtype=np.float64)
    v = np.eye(n)
    frob = float(np.linalg.norm(work))
    floor = (SVD_NEGLIGIBLE_FACTOR * max(m, n) * _EPS * frob) ** 2

    if n > 1 and frob > 0.0:
        rounds = _round_robin(n)
        worst = 0.0
        for sweep in range(1, max_sweeps + 1):
            worst = 0.0
            for p, q in rounds:
                ap = work[:, p]
                aq = work[:, q]
                alpha = np.einsum("ij,ij->j", ap, ap)
                beta = np.einsum("ij,ij->j", aq, aq)
                gamma = np.einsum("ij,ij->j", ap, aq)
                live = (alpha > floor) & (beta > floor)
                cosine = np.zeros_like(gamma)
                cosine[live] = np.abs(gamma[live]) / np.sqrt(alpha[live] * beta[live])
                worst = max(worst, float(cosine.max(initial=0.0)))
                rotate = cosine > tol
                if not rotate.any():
                    continue
                pr, qr = p[rotate], q[rotate]
                zeta = (beta[rotate] - alpha[rotate]) / (2.0 * gamma[rotate])
                t = np.where(zeta >= 0.0, 1.0, -1.0) / (
                    np.abs(zeta) + np.hypot(1.0, zeta)
                )
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                for target in (work, v):
                    xp = target[:, pr]
                    xq = target[:, qr]
                    target[:, pr] = c * xp - s * xq
                    target[:, qr] = s * xp + c * xq
            if worst <= tol:
                _LOGGER.debug(
                    "Jacobi SVD of %dx%d converged after %d sweeps", m, n, sweep
                )
                break
        else:
            raise SvdConvergenceError(residual=worst, sweeps=max_sweeps)

    norms = np.linalg.norm(work, axis=0)
    order = np.argsort(-norms, kind="stable")
    s_values = norms[order]
    work = work[:, order]
    v = v[:, order]

    kept = int(np.count_nonzero(s_values > np.sqrt(floor)))
    s_values[kept:] = 0.0
    u = np.empty((m, n))
    u[:, :kept] = work[:, :kept] / s_values[:kept]
    if kept < n:
        u[:, kept:] = _complete_basis(u[:, :kept], n - kept)
    return u, s_values, v


def svd(
    w: DenseMatrix,
    *,
    tol: float = SVD_ROTATION_TOL,
    max_sweeps: int = SVD_MAX_SWEEPS,
) -> SvdFactors:
    """Deterministic thin SVD by cyclic one-sided Jacobi sweeps.

    Wide matrices are decomposed through their transpose so rotations always
    act on the shorter dimension. Singular values within a small multiple of
    eps * ||W||_F of zero are returned as exact zeros. The largest-magnitude entry
    of every column of ``u`` is made nonnegative, with the matching row of ``vt``
    flipped.

    Raises:
        SvdConvergenceError: if rotations are still needed after ``max_sweeps``.
    """
    a = as_matrix(w)
    m, n = a.shape
    if m >= n:
        u, s, v = _one_sided_jacobi(a, tol, max_sweeps)
        vt = v.T
    else:
        left, s, right = _one_sided_jacobi(a.T, tol, max_sweeps)
        u, vt = right, left.T

    pivots = np.argmax(np.abs(u), axis=0)
    signs = np.where(u[pivots, np.arange(u.shape[1])] < 0.0, -1.0, 1.0)
    u = u * signs
    vt = vt * signs[:, np.newaxis]

    return SvdFactors(
        u=_frozen(np.ascontiguousarray(u)),
        s=_frozen(np.ascontiguousarray(s)),
        vt=_frozen(np.ascontiguousarray(vt)),
    )
