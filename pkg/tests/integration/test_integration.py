"""End-to-end tests on the 64-256-128-10 blob fixture."""

from dataclasses import replace
from typing import NamedTuple

import numpy as np
import pytest

from arsvd.config import ExperimentConfig, TrainConfig
from arsvd.const import DEFAULT_LAYER_DIMS, FIXTURE_STANDARD, FIXTURE_STEP
from arsvd.formats.container import read_container, write_container
from arsvd.formats.manifest import load_model, save_model
from arsvd.harness.fixtures import build_fixture_model, make_blobs
from arsvd.harness.sweep import matched_budget_check, mean_rank
from arsvd.linalg import FlopMeter
from arsvd.models import Dataset
from arsvd.network.graph import (
    ModelGraph,
    compress_model,
    forward,
    predict_labels,
    predict_scores,
    truncate_model,
)
from arsvd.network.layers import DenseLayer, FactoredLayer
from arsvd.network.metrics import Metrics, evaluate, layer_flops
from arsvd.network.trainer import Trainer, loss_and_gradients

pytestmark = [pytest.mark.integration, pytest.mark.slow]

TAU = 0.9


class SeedRun(NamedTuple):
    """Dense and compressed fixture models of one seed."""

    seed: int
    test: Dataset
    dense: ModelGraph
    dense_metrics: Metrics
    compressed: ModelGraph
    compressed_metrics: Metrics
    ranks: list[int]


def _seed_runs(experiment):
    runs = []
    for seed in experiment.seeds:
        train, test = make_blobs(replace(experiment.blobs, seed=seed))
        dense = build_fixture_model(experiment, seed, train)
        result = compress_model(dense, TAU)
        runs.append(
            SeedRun(
                seed=seed,
                test=test,
                dense=dense,
                dense_metrics=evaluate(dense, test),
                compressed=result.model,
                compressed_metrics=evaluate(result.model, test),
                ranks=result.log.ranks,
            )
        )
    return runs


@pytest.fixture(scope="module")
def standard_runs():
    """Default sweep config, plain SGD training, compressed at tau = 0.9."""
    return _seed_runs(ExperimentConfig())


@pytest.fixture(scope="module")
def step_runs():
    """Step-spectrum fixture models, compressed at tau = 0.9."""
    return _seed_runs(replace(ExperimentConfig(), fixture=FIXTURE_STEP))


MAY_INFLATE = pytest.mark.xfail(
    strict=False,
    reason="plain SGD weights keep a spread spectrum; tau = 0.9 can inflate",
)

FIXTURES = [FIXTURE_STEP, pytest.param(FIXTURE_STANDARD, marks=MAY_INFLATE)]


def _he_model(seed):
    model = Trainer(TrainConfig(layer_dims=DEFAULT_LAYER_DIMS, seed=seed)).init_model()
    rng = np.random.default_rng(seed)
    return ModelGraph.from_layers(
        [
            DenseLayer(
                w=layer.w,
                bias=rng.standard_normal(layer.out_dim) * 0.1,
                activation=layer.activation,
            )
            for layer in model.layers
        ]
    )


class TestFactoredForward:
    """Factored passes against dense passes at full rank."""

    def test_full_rank_scores_and_flops(self):
        """Test tau = 1 scores match dense and meters match the cost model."""
        model = _he_model(4)
        result = compress_model(model, 1.0)
        x = np.random.default_rng(5).standard_normal((200, 64))

        assert result.model.ranks == [64, 128, 10]
        np.testing.assert_allclose(
            predict_scores(result.model, x), predict_scores(model, x), atol=1e-6
        )

        dense_meter = FlopMeter()
        factored_meter = FlopMeter()
        forward(model, x[0], dense_meter)
        forward(result.model, x[0], factored_meter)
        for index, (dense, factored) in enumerate(
            zip(model.layers, result.model.layers, strict=True)
        ):
            m, n = dense.shape
            k = factored.k
            label = f"layer{index}"

            assert dense_meter.per_layer[label] == m * n
            assert factored_meter.per_layer[label] == k * (m + n) + k


class TestGradientCheck:
    """Backpropagation on the fixture architecture."""

    def test_sampled_parameters(self):
        """Test 250 sampled parameters against central differences."""
        model = _he_model(6)
        train, _ = make_blobs(ExperimentConfig().blobs)
        features = train.features[:20]
        labels = train.labels[:20]
        _, grads = loss_and_gradients(model, features, labels)

        weights = [np.array(layer.w) for layer in model.layers]
        biases = [np.array(layer.bias) for layer in model.layers]

        def loss():
            layers = [
                DenseLayer(w=w, bias=b, activation=layer.activation)
                for layer, w, b in zip(model.layers, weights, biases, strict=True)
            ]
            return loss_and_gradients(
                ModelGraph.from_layers(layers), features, labels
            )[0]

        def masks():
            h = features
            out = []
            for w, b in zip(weights[:-1], biases[:-1], strict=True):
                z = h @ w.T + b
                out.append(z > 0.0)
                h = np.maximum(z, 0.0)
            return out

        base = masks()
        rng = np.random.default_rng(7)
        step = 1e-5
        checked = 0
        while checked < 250:
            index = int(rng.integers(len(weights)))
            use_bias = rng.random() < 0.2
            params = biases[index] if use_bias else weights[index]
            grad = grads[index][1] if use_bias else grads[index][0]
            position = tuple(int(rng.integers(dim)) for dim in params.shape)
            original = params[position]
            params[position] = original + step
            plus, plus_masks = loss(), masks()
            params[position] = original - step
            minus, minus_masks = loss(), masks()
            params[position] = original
            crossed = any(
                not np.array_equal(a, b)
                for moved in (plus_masks, minus_masks)
                for a, b in zip(moved, base, strict=True)
            )
            if crossed:
                continue
            numeric = (plus - minus) / (2 * step)
            analytic = grad[position]

            assert abs(numeric - analytic) <= 1e-4 * max(
                abs(numeric), abs(analytic)
            ) + 1e-8, (index, use_bias, position)
            checked += 1


class TestDeskScaleCompression:
    """ARSVD at tau = 0.9 on the trained fixture models."""

    @pytest.mark.parametrize("fixture_kind", FIXTURES)
    def test_parameter_reduction(self, fixture_kind, request):
        """Test total parameters shrink by at least a quarter on every seed."""
        for run in request.getfixturevalue(f"{fixture_kind}_runs"):
            dense = run.dense.weight_params

            assert dense == 50432
            assert run.compressed.weight_params <= 0.75 * dense, run.seed

    @pytest.mark.parametrize("fixture_kind", FIXTURES)
    def test_accuracy_and_f1_preserved(self, fixture_kind, request):
        """Test accuracy within two points and macro-F1 within 0.03."""
        for run in request.getfixturevalue(f"{fixture_kind}_runs"):
            dense, compressed = run.dense_metrics, run.compressed_metrics

            assert compressed.accuracy >= dense.accuracy - 0.02, run.seed
            assert compressed.macro_f1 >= dense.macro_f1 - 0.03, run.seed

    @pytest.mark.parametrize("fixture_kind", FIXTURES)
    def test_flops_lower_on_every_layer(self, fixture_kind, request):
        """Test each factored layer costs fewer FLOPs than its dense layer."""
        for run in request.getfixturevalue(f"{fixture_kind}_runs"):
            dense = layer_flops(run.dense)
            compressed = layer_flops(run.compressed)

            for label, count in dense.items():
                assert compressed[label] < count, (run.seed, label)
            assert (
                run.compressed_metrics.flops_per_sample
                < run.dense_metrics.flops_per_sample
            )

    def test_ranks_below_full(self, step_runs):
        """Test every layer keeps fewer than min(m, n) directions."""
        for run in step_runs:
            bounds = [min(layer.shape) for layer in run.dense.layers]

            assert all(k < bound for k, bound in zip(run.ranks, bounds, strict=True))


class TestStandardFixture:
    """ARSVD on plain SGD weights of the default sweep."""

    def test_task_not_saturated(self, standard_runs):
        """Test the dense model is useful but not perfect on every seed."""
        for run in standard_runs:
            assert 0.5 < run.dense_metrics.accuracy < 1.0, run.seed

    def test_spread_spectra_keep_more(self, standard_runs, step_runs):
        """Test plain weights keep more parameters than step-spectrum weights."""
        for standard, step in zip(standard_runs, step_runs, strict=True):
            assert standard.compressed.weight_params > step.compressed.weight_params

    def test_no_inflate_never_exceeds_dense(self, standard_runs):
        """Test no_inflate keeps the model within its dense parameter count."""
        for run in standard_runs:
            guarded = compress_model(run.dense, TAU, no_inflate=True).model

            assert guarded.weight_params <= run.dense.weight_params, run.seed
            for before, after in zip(run.dense.layers, guarded.layers, strict=True):
                assert after.weight_params <= before.weight_params

    def test_high_tau_keeps_predictions(self, standard_runs):
        """Test tau = 0.99 agrees with the dense argmax on 98% of test samples."""
        for run in standard_runs:
            compressed = compress_model(run.dense, 0.99).model
            features = run.test.features
            agreement = np.mean(
                predict_labels(compressed, features)
                == predict_labels(run.dense, features)
            )

            assert agreement >= 0.98, run.seed


class TestFixedRankStructure:
    """ARSVD against the fixed-rank baseline."""

    def test_matched_budget_bit_identical(self, step_runs):
        """Test truncation at ARSVD's per-layer ranks rebuilds identical factors."""
        for run in step_runs:
            result = compress_model(run.dense, TAU)
            rebuilt = truncate_model(run.dense, run.ranks).model

            assert matched_budget_check(run.dense, result), run.seed
            for ours, theirs in zip(
                result.model.layers, rebuilt.layers, strict=True
            ):
                assert ours.u.tobytes() == theirs.u.tobytes()
                assert ours.s.tobytes() == theirs.s.tobytes()
                assert ours.vt.tobytes() == theirs.vt.tobytes()

    def test_mean_rank_baseline(self, step_runs):
        """Test a global mean rank does not beat ARSVD by half a point on all seeds."""
        holds = []
        for run in step_runs:
            baseline = truncate_model(run.dense, mean_rank(run.ranks)).model
            accuracy = evaluate(baseline, run.test).accuracy
            holds.append(accuracy <= run.compressed_metrics.accuracy + 0.005)

        assert any(holds), holds


class TestRoundTrips:
    """Container and model round-trips on the compressed fixture."""

    def test_compressed_model_bit_exact(self, step_runs, tmp_path):
        """Test reload gives bit-identical tensors and inference on 100 inputs."""
        run = step_runs[0]
        path = tmp_path / "fixture.artn"
        save_model(run.compressed, path)
        loaded = load_model(path)

        for ours, theirs in zip(run.compressed.layers, loaded.layers, strict=True):
            assert isinstance(theirs, FactoredLayer)
            assert ours.u.tobytes() == theirs.u.tobytes()
            assert ours.s.tobytes() == theirs.s.tobytes()
            assert ours.vt.tobytes() == theirs.vt.tobytes()
            assert ours.bias.tobytes() == theirs.bias.tobytes()
        for x in np.random.default_rng(8).standard_normal((100, 64)):
            assert forward(loaded, x).tobytes() == forward(run.compressed, x).tobytes()

    def test_container_write_read_write(self, step_runs, tmp_path):
        """Test write, read, write of the fixture container is byte-identical."""
        first = tmp_path / "a.artn"
        second = tmp_path / "b.artn"
        save_model(step_runs[0].compressed, first)
        write_container(second, read_container(first))

        assert first.read_bytes() == second.read_bytes()
