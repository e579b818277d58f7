"""Command-line entry point: ``fit``, ``train``, ``evaluate`` and ``export``.

Exit codes: 0 success, 2 usage error, 3 data or format error, 4 numeric
failure (singular charges, diverging training).
"""
from __future__ import annotations

import argparse
import logging
import sys
import traceback

from . import pipeline
from .errors import (
    DivergenceError, DomainError, EquilibriumError, FormatError, ShapeError, SingularityError,
)

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

# flag name -> PipelineConfig field; flags default to None so that only
# explicitly given values override the config file
OPTIONS = {
    "--data-format": dict(dest="data_format", choices=["idx", "csv"]),
    "--train-images": dict(dest="train_images"),
    "--train-labels": dict(dest="train_labels"),
    "--test-images": dict(dest="test_images"),
    "--test-labels": dict(dest="test_labels"),
    "--train-csv": dict(dest="train_csv"),
    "--test-csv": dict(dest="test_csv"),
    "--label-column": dict(dest="label_column", type=int),
    "--channels": dict(dest="channels", type=int),
    "--dataset": dict(dest="dataset_name", help="name used to pick the default k"),
    "--resolution": dict(dest="resolution", choices=["8", "16", "native"]),
    "--max-train": dict(dest="max_train", type=int),
    "--max-test": dict(dest="max_test", type=int),
    "--k": dict(dest="k", type=float),
    "--tolerance": dict(dest="tolerance", type=float),
    "--max-iterations": dict(dest="max_iterations", type=int),
    "--initial-step": dict(dest="initial_step", type=float),
    "--step-decay": dict(dest="step_decay", type=float),
    "--step-growth": dict(dest="step_growth", type=float),
    "--jitter-scale": dict(dest="jitter_scale", type=float),
    "--hidden": dict(dest="hidden", help="comma-separated hidden widths"),
    "--epochs": dict(dest="epochs", type=int),
    "--batch": dict(dest="batch_size", type=int),
    "--lr": dict(dest="lr", help="learning-rate schedule RATE:EPOCHS[,RATE:EPOCHS...]"),
    "--rho": dict(dest="rho", type=float),
    "--opt-eps": dict(dest="opt_eps", type=float),
    "--erc": dict(dest="erc", choices=["both", "on", "off"]),
}
SWITCHES = {
    "--erc-direct": "erc_direct",
    "--spread-weighted-classify": "spread_weighted_classify",
    "--per-sample": "per_sample",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' config file")
    common.add_argument("--model-dir", dest="model_dir")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")
    for flag, kwargs in OPTIONS.items():
        common.add_argument(flag, default=None, **kwargs)
    for flag, dest in SWITCHES.items():
        common.add_argument(flag, dest=dest, action="store_const", const=True, default=None)

    parser = argparse.ArgumentParser(
        prog="coulomb-equilibrium",
        description="Class equilibrium via Coulomb repulsion: fit, train, evaluate, export.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fit", parents=[common], help="compute the equilibrium space")
    sub.add_parser("train", parents=[common], help="learn the input -> equilibrium transform")
    sub.add_parser("evaluate", parents=[common], help="classify the test split")
    export = sub.add_parser("export", parents=[common], help="write equilibrium coordinates as CSV")
    export.add_argument("--split", choices=["train", "test"], default="train")
    export.add_argument("--output")
    return parser


def config_from_args(args) -> pipeline.PipelineConfig:
    values = pipeline.read_config_file(args.config) if args.config else {}
    for name in ["model_dir", "seed", *(kw["dest"] for kw in OPTIONS.values()), *SWITCHES.values()]:
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value
    return pipeline.PipelineConfig.from_mapping(values)


def _origin(exc: BaseException) -> str:
    module = "cli"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        name = frame.f_globals.get("__name__", "")
        if name.startswith("coulomb_equilibrium."):
            module = name.rsplit(".", 1)[-1]
    return module


def run(args) -> int:
    config = config_from_args(args)
    if args.command == "fit":
        model = pipeline.fit(config)
        print(f"converged={str(model.converged).lower()} iterations={model.iterations_used} "
              f"final_total_force={model.final_total_force:.6g} n={model.n_classes} d={model.dim}")
    elif args.command == "train":
        transform = pipeline.train_transform(config)
        last = transform.loss_history[-1] if transform.loss_history else float("nan")
        print(f"epochs={transform.epochs_completed} final_loss={last:.6g} "
              f"parameters={transform.n_parameters}")
    elif args.command == "evaluate":
        reports = pipeline.evaluate(config)
        print(f"{'':12s}{'Before ERC':>12s}{'After ERC':>12s}")
        row = [f"{reports[m].accuracy * 100:.2f}" if m in reports and reports[m].accuracy is not None
               else "-" for m in (False, True)]
        print(f"{'accuracy %':12s}{row[0]:>12s}{row[1]:>12s}")
        for mode, report in reports.items():
            n = max(report.n_samples, 1)
            per = {k: v / n for k, v in report.timing.items()}
            print(f"timing per sample ({'ERC' if mode else 'no ERC'}): "
                  + " ".join(f"{k}={v:.2e}s" for k, v in per.items()))
    else:
        path = pipeline.export_embeddings(config, args.split, args.output)
        print(path)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except (SingularityError, DivergenceError) as exc:
        print(f"error [{_origin(exc)}]: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FileNotFoundError as exc:
        print(f"error [{_origin(exc)}]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FormatError, ShapeError, DomainError, EquilibriumError, ValueError) as exc:
        print(f"error [{_origin(exc)}]: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
