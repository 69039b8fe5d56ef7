"""Test dense and factored layers."""

import numpy as np
import pytest

from arsvd.compress import LowRankFactors, fixed_rank_truncate, truncate
from arsvd.exceptions import ContractViolationError, DimensionMismatchError
from arsvd.linalg import FlopMeter, svd
from arsvd.network.layers import (
    Activation,
    DenseLayer,
    FactoredLayer,
    forward_factored,
)


class TestActivation:
    """Test activation tags."""

    def test_relu(self):
        """Test ReLU clips negatives."""
        assert Activation.RELU.apply(np.array([-1.0, 0.0, 2.0])).tolist() == [0, 0, 2]

    def test_softmax_sums_to_one(self, rng):
        """Test softmax outputs sum to one, even for large scores."""
        for scale in (1.0, 1e3, 1e6):
            probs = Activation.SOFTMAX.apply(rng.standard_normal(10) * scale)

            assert abs(probs.sum() - 1.0) <= 1e-12
            assert (probs >= 0.0).all()

    def test_identity(self):
        """Test identity passes scores through."""
        z = np.array([-3.0, 4.0])

        assert Activation.IDENTITY.apply(z).tolist() == [-3.0, 4.0]

    def test_elementwise_counted(self):
        """Test activations record element-wise work, identity none."""
        meter = FlopMeter()
        Activation.RELU.apply(np.ones(5), meter)
        Activation.IDENTITY.apply(np.ones(5), meter)

        assert meter.elementwise == 5
        assert meter.multiply_adds == 0

    def test_from_string(self):
        """Test tags parse from their string values."""
        layer = DenseLayer(w=np.eye(2), bias=np.zeros(2), activation="softmax")

        assert layer.activation is Activation.SOFTMAX


class TestDenseLayer:
    """Test DenseLayer."""

    def test_affine_identity(self):
        """Test W = I, b = (1, -1) maps (2, 3) to (3, 2)."""
        layer = DenseLayer(
            w=np.eye(2), bias=np.array([1.0, -1.0]), activation=Activation.IDENTITY
        )

        assert layer.forward(np.array([2.0, 3.0])).tolist() == [3.0, 2.0]

    def test_dimensions(self, rng):
        """Test shape accessors and counts."""
        layer = DenseLayer(w=rng.standard_normal((5, 3)), bias=np.zeros(5))

        assert layer.shape == (5, 3)
        assert (layer.in_dim, layer.out_dim) == (3, 5)
        assert layer.weight_params == layer.flops == 15

    def test_flops_metered(self, rng):
        """Test a dense forward records exactly mn multiply-adds."""
        layer = DenseLayer(w=rng.standard_normal((7, 4)), bias=np.zeros(7))
        meter = FlopMeter()
        layer.forward(rng.standard_normal(4), meter, "layer0")

        assert meter.multiply_adds == 28
        assert meter.per_layer == {"layer0": 28}

    def test_bias_mismatch(self):
        """Test the bias length must equal the output dimension."""
        with pytest.raises(DimensionMismatchError, match="Bias of length 3"):
            DenseLayer(w=np.eye(2), bias=np.zeros(3))

    def test_unknown_activation(self):
        """Test unknown activation tags are rejected."""
        with pytest.raises(ContractViolationError, match="tanh"):
            DenseLayer(w=np.eye(2), bias=np.zeros(2), activation="tanh")

    def test_batch_matches_single(self, rng):
        """Test the batched pass equals per-row passes."""
        layer = DenseLayer(w=rng.standard_normal((4, 6)), bias=rng.standard_normal(4))
        x = rng.standard_normal((5, 6))
        rows = np.array([layer.forward(row) for row in x])

        np.testing.assert_allclose(layer.forward_batch(x), rows, atol=1e-12)

    def test_batch_width_mismatch(self, rng):
        """Test the batched pass checks the input width."""
        layer = DenseLayer(w=rng.standard_normal((4, 6)), bias=np.zeros(4))

        with pytest.raises(DimensionMismatchError):
            layer.forward_batch(np.ones((2, 5)))


class TestFactoredLayer:
    """Test FactoredLayer."""

    def test_unit_direction(self):
        """Test identity slices with s = (2) scale e1 by two."""
        factors = LowRankFactors(
            u=np.eye(3)[:, :1], s=np.array([2.0]), vt=np.eye(3)[:1, :]
        )
        layer = FactoredLayer(
            factors=factors, bias=np.zeros(3), activation=Activation.IDENTITY
        )

        assert forward_factored(layer, np.array([1.0, 0.0, 0.0])).tolist() == [
            2.0,
            0.0,
            0.0,
        ]

    def test_exact_factorization_matches_dense(self, rng):
        """Test full-rank factors reproduce the dense layer."""
        w = rng.standard_normal((6, 5))
        bias = rng.standard_normal(6)
        dense = DenseLayer(w=w, bias=bias, activation=Activation.IDENTITY)
        factored = FactoredLayer(
            factors=truncate(svd(w), 5), bias=bias, activation=Activation.IDENTITY
        )
        h = rng.standard_normal(5)

        np.testing.assert_allclose(factored.forward(h), dense.forward(h), atol=1e-8)

    def test_truncated_matches_materialized(self, rng):
        """Test the three-step pass equals multiplying by the materialized matrix."""
        w = rng.standard_normal((9, 7))
        factors = fixed_rank_truncate(w, 3)
        bias = rng.standard_normal(9)
        factored = FactoredLayer(factors, bias, Activation.RELU)
        materialized = DenseLayer(factors.materialize(), bias, Activation.RELU)
        h = rng.standard_normal(7)

        np.testing.assert_allclose(
            factored.forward(h), materialized.forward(h), atol=1e-10
        )

    def test_flops_metered(self, rng):
        """Test a factored forward records kn + k + km multiply-adds."""
        w = rng.standard_normal((12, 8))
        layer = FactoredLayer(fixed_rank_truncate(w, 3), np.zeros(12))
        meter = FlopMeter()
        layer.forward(rng.standard_normal(8), meter, "layer1")

        assert meter.multiply_adds == 3 * 8 + 3 + 3 * 12 == layer.flops
        assert meter.per_layer == {"layer1": layer.flops}
        assert meter.elementwise == 12 + 12

    def test_accessors(self, rng):
        """Test shape and parameter accessors."""
        layer = FactoredLayer(
            fixed_rank_truncate(rng.standard_normal((10, 4)), 2), np.zeros(10)
        )

        assert layer.k == 2
        assert layer.shape == layer.original_shape == (10, 4)
        assert (layer.in_dim, layer.out_dim) == (4, 10)
        assert layer.weight_params == 2 * 14
        assert layer.u.shape == (10, 2)
        assert layer.vt.shape == (2, 4)

    def test_batch_matches_single(self, rng):
        """Test the batched factored pass equals per-row passes."""
        layer = FactoredLayer(
            fixed_rank_truncate(rng.standard_normal((5, 6)), 2),
            rng.standard_normal(5),
            Activation.SOFTMAX,
        )
        x = rng.standard_normal((4, 6))
        rows = np.array([layer.forward(row) for row in x])

        np.testing.assert_allclose(layer.forward_batch(x), rows, atol=1e-12)

    def test_bias_mismatch(self, rng):
        """Test the bias length must equal m."""
        with pytest.raises(DimensionMismatchError):
            FactoredLayer(fixed_rank_truncate(np.eye(3), 1), np.zeros(2))

    def test_input_mismatch(self):
        """Test the single-vector pass checks the input length."""
        layer = FactoredLayer(fixed_rank_truncate(np.eye(3), 1), np.zeros(3))

        with pytest.raises(DimensionMismatchError):
            layer.forward(np.ones(4))
