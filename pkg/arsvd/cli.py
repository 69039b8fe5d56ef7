"""Command-line interface for arsvd."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn

from . import __version__
from .config import BlobSpec, ExperimentConfig, TrainConfig
from .const import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_CLASS_COUNT,
    DEFAULT_CLUSTER_STD,
    DEFAULT_DIMENSION,
    DEFAULT_EPOCHS,
    DEFAULT_LEARNING_RATE,
    DEFAULT_SAMPLES_PER_CLASS,
    DEFAULT_SEED,
    DEFAULT_SEPARATION,
    DEFAULT_STEP_EPSILON,
    DEFAULT_TAU,
    DEFAULT_TEST_FRACTION,
    DEFAULT_TIMING_REPEATS,
    EXIT_CONTRACT,
    EXIT_IO,
    EXIT_OK,
)
from .entropy import effective_rank, entropy_profile, normalize_spectrum, select_rank
from .exceptions import ArsvdError, ContractViolationError
from .formats.dataset import load_dataset, write_dataset
from .formats.manifest import load_model, save_model
from .formats.report import compare_reports, emit_report, format_comparison, read_report
from .harness.fixtures import make_blobs
from .harness.sweep import (
    compare_sweep,
    format_sweep,
    format_sweep_comparison,
    read_sweep,
    run_sweep,
    write_sweep,
)
from .linalg import svd
from .network.graph import compress_model, truncate_model
from .network.layers import FactoredLayer
from .network.metrics import evaluate, layer_flops
from .network.trainer import Trainer
from .utils import format_count, format_table, parse_int_list

_LOGGER = logging.getLogger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the contract code."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONTRACT, f"{self.prog}: error: {message}\n")


def _cmd_compress(args: argparse.Namespace) -> int:
    model = load_model(args.model, args.manifest)
    if args.fixed_rank is not None:
        result = truncate_model(
            model, args.fixed_rank, no_inflate=args.no_inflate, max_workers=args.workers
        )
    else:
        result = compress_model(
            model, args.tau, no_inflate=args.no_inflate, max_workers=args.workers
        )
    save_model(result.model, args.out, args.out_manifest)
    if args.report:
        emit_report(result.report, args.report)

    rows = [
        (
            record.layer_index,
            f"{record.m}x{record.n}",
            record.k,
            record.params_before,
            record.params_after,
            record.achieved_fraction,
            record.reconstruction_error,
            record.inflation,
        )
        for record in result.report.layers
    ]
    header = ("layer", "shape", "k", "params_before", "params_after")
    print(format_table((*header, "entropy_fraction", "error", "inflation"), rows))
    totals = result.report.totals
    print(
        f"total parameters {format_count(totals.params_before)} -> "
        f"{format_count(totals.params_after)} "
        f"({totals.param_reduction:.1%} reduction)"
    )
    return EXIT_OK


def _cmd_inspect(args: argparse.Namespace) -> int:
    model = load_model(args.model, args.manifest)
    rows = []
    for index, layer in enumerate(model.layers):
        kind = "factored" if isinstance(layer, FactoredLayer) else "dense"
        rank = layer.k if isinstance(layer, FactoredLayer) else min(layer.shape)
        rows.append(
            (
                index,
                kind,
                f"{layer.out_dim}x{layer.in_dim}",
                rank,
                layer.activation.value,
                layer.weight_params,
                layer.flops,
            )
        )
    header = ("layer", "kind", "shape", "rank", "activation", "params", "flops")
    print(format_table(header, rows))
    print(
        f"input_dim {model.input_dim}, classes {model.class_count}, "
        f"parameters {format_count(model.weight_params)} "
        f"(dense equivalent {format_count(model.dense_weight_params)})"
    )
    return EXIT_OK


def _cmd_spectrum(args: argparse.Namespace) -> int:
    model = load_model(args.model, args.manifest)
    if not 0 <= args.layer < model.depth:
        raise ContractViolationError(
            f"Layer {args.layer} outside [0, {model.depth - 1}]"
        )
    layer = model.layers[args.layer]
    s = layer.s if isinstance(layer, FactoredLayer) else svd(layer.w).s
    spectrum = normalize_spectrum(s)
    profile = entropy_profile(spectrum, args.log_base)
    selection = select_rank(profile, args.tau)
    fractions = profile.fractions()
    rows = [
        (k, float(s[k - 1]), float(spectrum.p[k - 1]), float(h), float(f))
        for k, (h, f) in enumerate(zip(profile.partial, fractions, strict=True), 1)
    ]
    print(format_table(("k", "s", "p", "H(k)", "fraction"), rows))
    print(
        f"H_total {profile.total:.6g}, effective rank {effective_rank(profile):.4g}, "
        f"selected k {selection.k} at tau {selection.tau:g} "
        f"(fraction {selection.achieved_fraction:.6g})"
    )
    return EXIT_OK


def _cmd_train(args: argparse.Namespace) -> int:
    config = TrainConfig.from_dict(
        {
            "layer_dims": parse_int_list(args.arch),
            "seed": args.seed,
            "epochs": args.epochs,
            "learning_rate": args.lr,
            "batch_size": args.batch_size,
            "weight_decay": args.weight_decay,
            "spectral_step": (
                None
                if args.step_fraction is None
                else {"fraction": args.step_fraction, "epsilon": args.step_epsilon}
            ),
        }
    )
    dataset = load_dataset(args.data, config.class_count)
    trainer = Trainer(config)
    model = trainer.fit(dataset)
    save_model(model, args.out, args.out_manifest)
    print(
        f"trained {'-'.join(str(d) for d in config.layer_dims)} for "
        f"{config.epochs} epochs: final loss "
        f"{trainer.loss_history[-1] if trainer.loss_history else float('nan'):.6g}, "
        f"training accuracy {trainer.train_accuracy:.4f}"
    )
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    model = load_model(args.model, args.manifest)
    dataset = load_dataset(args.data, model.class_count)
    metrics = evaluate(model, dataset, args.repeat)
    rows = [
        ("samples", metrics.sample_count),
        ("accuracy", metrics.accuracy),
        ("macro_f1", metrics.macro_f1),
        ("seconds_per_sample", metrics.seconds_per_sample),
        ("flops_per_sample", metrics.flops_per_sample),
        ("total_flops", metrics.total_flops),
        *((f"flops_{name}", count) for name, count in layer_flops(model).items()),
    ]
    print(format_table(("metric", "value"), rows))
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    reports = (args.report_a, args.report_b)
    if args.sweep is not None:
        if any(path is not None for path in reports):
            raise ContractViolationError(
                "--sweep cannot be combined with --report-a or --report-b"
            )
        print(format_sweep_comparison(compare_sweep(read_sweep(args.sweep))))
        return EXIT_OK
    if any(path is None for path in reports):
        raise ContractViolationError(
            "compare needs both --report-a and --report-b, or --sweep"
        )
    rows = compare_reports(read_report(args.report_a), read_report(args.report_b))
    print(format_comparison(rows))
    return EXIT_OK


def _cmd_make_blobs(args: argparse.Namespace) -> int:
    spec = BlobSpec.from_dict(
        {
            "class_count": args.classes,
            "samples_per_class": args.samples_per_class,
            "dimension": args.dimension,
            "separation": args.separation,
            "cluster_std": args.std,
            "test_fraction": args.test_fraction,
            "seed": args.seed,
        }
    )
    train, test = make_blobs(spec)
    write_dataset(train, args.out)
    if args.test_out:
        write_dataset(test, args.test_out)
    print(f"wrote {train.sample_count} training samples to {args.out}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = (
        ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    )
    rows = run_sweep(config)
    if args.out:
        write_sweep(rows, args.out)
    print(format_sweep(rows))
    return EXIT_OK


def _model_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", required=True, type=Path, help="Model container")
    parser.add_argument(
        "--manifest", type=Path, help="Model manifest (default: beside the container)"
    )


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser with every subcommand."""
    parser = _ArgumentParser(
        prog="arsvd",
        description="Adaptive-rank SVD compression of fully connected networks.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Enable debug logging"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compress = sub.add_parser("compress", help="Compress every dense layer")
    _model_arguments(compress)
    method = compress.add_mutually_exclusive_group()
    method.add_argument("--tau", type=float, default=DEFAULT_TAU)
    method.add_argument("--fixed-rank", type=int, help="Fixed-rank baseline")
    compress.add_argument("--no-inflate", action="store_true")
    compress.add_argument("--out", required=True, type=Path)
    compress.add_argument("--out-manifest", type=Path)
    compress.add_argument("--report", type=Path, help="JSON Lines report path")
    compress.add_argument("--workers", type=int, default=1)
    compress.set_defaults(handler=_cmd_compress)

    inspect = sub.add_parser("inspect", help="Print layer shapes and ranks")
    _model_arguments(inspect)
    inspect.set_defaults(handler=_cmd_inspect)

    spectrum = sub.add_parser("spectrum", help="Print a layer's entropy profile")
    _model_arguments(spectrum)
    spectrum.add_argument("--layer", type=int, required=True)
    spectrum.add_argument("--tau", type=float, default=DEFAULT_TAU)
    spectrum.add_argument("--log-base", type=float)
    spectrum.set_defaults(handler=_cmd_spectrum)

    train = sub.add_parser("train", help="Train a fixture MLP")
    train.add_argument("--data", required=True, type=Path)
    train.add_argument("--arch", required=True, help='Layer widths, e.g. "64,32,10"')
    train.add_argument("--seed", type=int, default=DEFAULT_SEED)
    train.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS)
    train.add_argument("--lr", type=float, default=DEFAULT_LEARNING_RATE)
    train.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    train.add_argument("--weight-decay", type=float, default=0.0)
    train.add_argument(
        "--step-fraction",
        type=float,
        help="Project hidden weights onto a step spectrum after every epoch",
    )
    train.add_argument("--step-epsilon", type=float, default=DEFAULT_STEP_EPSILON)
    train.add_argument("--out", required=True, type=Path)
    train.add_argument("--out-manifest", type=Path)
    train.set_defaults(handler=_cmd_train)

    evaluate_cmd = sub.add_parser("eval", help="Accuracy, macro-F1, time and FLOPs")
    _model_arguments(evaluate_cmd)
    evaluate_cmd.add_argument("--data", required=True, type=Path)
    evaluate_cmd.add_argument("--repeat", type=int, default=DEFAULT_TIMING_REPEATS)
    evaluate_cmd.set_defaults(handler=_cmd_eval)

    compare = sub.add_parser("compare", help="Side-by-side report or sweep deltas")
    compare.add_argument("--report-a", type=Path)
    compare.add_argument("--report-b", type=Path)
    compare.add_argument(
        "--sweep", type=Path, help="Sweep rows to compare against each dense row"
    )
    compare.set_defaults(handler=_cmd_compare)

    blobs = sub.add_parser("make-blobs", help="Write a Gaussian-blob dataset")
    blobs.add_argument("--out", required=True, type=Path)
    blobs.add_argument("--test-out", type=Path)
    blobs.add_argument("--classes", type=int, default=DEFAULT_CLASS_COUNT)
    blobs.add_argument(
        "--samples-per-class", type=int, default=DEFAULT_SAMPLES_PER_CLASS
    )
    blobs.add_argument("--dimension", type=int, default=DEFAULT_DIMENSION)
    blobs.add_argument("--separation", type=float, default=DEFAULT_SEPARATION)
    blobs.add_argument("--std", type=float, default=DEFAULT_CLUSTER_STD)
    blobs.add_argument("--test-fraction", type=float, default=DEFAULT_TEST_FRACTION)
    blobs.add_argument("--seed", type=int, default=DEFAULT_SEED)
    blobs.set_defaults(handler=_cmd_make_blobs)

    sweep = sub.add_parser("sweep", help="ARSVD versus fixed-rank sweep")
    sweep.add_argument("--config", type=Path, help="JSON experiment config")
    sweep.add_argument("--out", type=Path, help="JSON Lines output path")
    sweep.set_defaults(handler=_cmd_sweep)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except ArsvdError as err:
        _LOGGER.debug("Command %s failed", args.command, exc_info=True)
        print(f"error: {err.message}", file=sys.stderr)
        return err.exit_code
    except OSError as err:
        _LOGGER.exception("I/O failure in command %s", args.command)
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
