"""Dense and factored fully connected layers."""

from __future__ import annotations

from dataclasses import dataclass

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()

import numpy as np
from scipy.special import softmax

from ..compress import LowRankFactors, cost_model
from ..exceptions import ContractViolationError, DimensionMismatchError
from ..linalg import DenseMatrix, FlopMeter, Vector, as_matrix, as_vector, matvec


class Activation(StrEnum):
    """Activation applied after the affine map of a layer."""

    RELU = "relu"
    SOFTMAX = "softmax"
    IDENTITY = "identity"

    def apply(self, z: np.ndarray, meter: FlopMeter | None = None) -> np.ndarray:
        """Apply the activation along the last axis."""
        if meter is not None and self is not Activation.IDENTITY:
            meter.add_elementwise(int(z.size))
        if self is Activation.RELU:
            return np.maximum(z, 0.0)
        if self is Activation.SOFTMAX:
            return softmax(z, axis=-1)
        return z


def _coerce_activation(value: Activation | str) -> Activation:
    try:
        return Activation(value)
    except ValueError as exc:
        raise ContractViolationError(f"Unknown activation {value!r}") from exc


def _add_bias(z: Vector, bias: Vector, meter: FlopMeter | None) -> Vector:
    if meter is not None:
        meter.add_elementwise(int(bias.size))
    return z + bias


@dataclass(frozen=True)
class DenseLayer:
    """h -> activation(W h + b)."""

    w: DenseMatrix
    bias: Vector
    activation: Activation = Activation.RELU

    def __post_init__(self) -> None:
        """Coerce storage and validate the bias length."""
        object.__setattr__(self, "w", as_matrix(self.w))
        object.__setattr__(self, "bias", as_vector(self.bias))
        object.__setattr__(self, "activation", _coerce_activation(self.activation))
        if self.bias.shape[0] != self.w.shape[0]:
            raise DimensionMismatchError(
                f"Bias of length {self.bias.shape[0]} for a "
                f"{self.w.shape[0]}x{self.w.shape[1]} weight"
            )

    @property
    def in_dim(self) -> int:
        """Get n."""
        return int(self.w.shape[1])

    @property
    def out_dim(self) -> int:
        """Get m."""
        return int(self.w.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        """Get (m, n)."""
        return self.out_dim, self.in_dim

    @property
    def weight_params(self) -> int:
        """Get the weight parameter count mn."""
        return self.out_dim * self.in_dim

    @property
    def flops(self) -> int:
        """Get multiply-adds per forward, mn."""
        return self.out_dim * self.in_dim

    def forward(
        self, h: Vector, meter: FlopMeter | None = None, label: str | None = None
    ) -> Vector:
        """Return activation(W h + b) for one input vector."""
        z = matvec(self.w, h, meter, label)
        return self.activation.apply(_add_bias(z, self.bias, meter), meter)

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        """Apply the layer to every row of ``x``."""
        if x.shape[-1] != self.in_dim:
            raise DimensionMismatchError(
                f"Input width {x.shape[-1]} does not match layer input {self.in_dim}"
            )
        return self.activation.apply(x @ self.w.T + self.bias)


@dataclass(frozen=True)
class FactoredLayer:
    """h -> activation(U_k (s_k * (V_k^T h)) + b), never materializing U_k S_k V_k^T."""

    factors: LowRankFactors
    bias: Vector
    activation: Activation = Activation.RELU

    def __post_init__(self) -> None:
        """Coerce storage and validate the bias length."""
        object.__setattr__(self, "bias", as_vector(self.bias))
        object.__setattr__(self, "activation", _coerce_activation(self.activation))
        if self.bias.shape[0] != self.factors.shape[0]:
            raise DimensionMismatchError(
                f"Bias of length {self.bias.shape[0]} for factors of a "
                f"{self.factors.shape[0]}x{self.factors.shape[1]} matrix"
            )

    @property
    def u(self) -> DenseMatrix:
        """Get U_k (m x k)."""
        return self.factors.u

    @property
    def s(self) -> Vector:
        """Get s_k."""
        return self.factors.s

    @property
    def vt(self) -> DenseMatrix:
        """Get V_k^T (k x n)."""
        return self.factors.vt

    @property
    def k(self) -> int:
        """Get the retained rank."""
        return self.factors.k

    @property
    def original_shape(self) -> tuple[int, int]:
        """Get the (m, n) shape of the replaced weight."""
        return self.factors.shape

    @property
    def shape(self) -> tuple[int, int]:
        """Get (m, n)."""
        return self.factors.shape

    @property
    def in_dim(self) -> int:
        """Get n."""
        return self.factors.shape[1]

    @property
    def out_dim(self) -> int:
        """Get m."""
        return self.factors.shape[0]

    @property
    def weight_params(self) -> int:
        """Get the factored parameter count k(m + n)."""
        m, n = self.shape
        return cost_model(m, n, self.k).factored_params

    @property
    def flops(self) -> int:
        """Get multiply-adds per forward, k n + k + k m."""
        m, n = self.shape
        return cost_model(m, n, self.k).factored_flops_per_forward

    def forward(
        self, h: Vector, meter: FlopMeter | None = None, label: str | None = None
    ) -> Vector:
        """Return the three-step factored product followed by bias and activation."""
        z = matvec(self.vt, h, meter, label)
        if meter is not None:
            meter.add(self.k, label)
        z = self.s * z
        z = matvec(self.u, z, meter, label)
        return self.activation.apply(_add_bias(z, self.bias, meter), meter)

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        """Apply the layer to every row of ``x``."""
        if x.shape[-1] != self.in_dim:
            raise DimensionMismatchError(
                f"Input width {x.shape[-1]} does not match layer input {self.in_dim}"
            )
        z = ((x @ self.vt.T) * self.s) @ self.u.T
        return self.activation.apply(z + self.bias)


Layer = DenseLayer | FactoredLayer


def forward_factored(
    layer: FactoredLayer,
    h: Vector,
    meter: FlopMeter | None = None,
    label: str | None = None,
) -> Vector:
    """Run one factored layer on ``h`` in k n + k + k m multiply-adds."""
    return layer.forward(h, meter, label)
