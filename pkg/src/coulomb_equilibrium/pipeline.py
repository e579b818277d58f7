"""End-to-end pipeline over a model directory.

``fit`` computes the equilibrium space from the training split, ``train``
learns the input-to-equilibrium regressor, ``evaluate`` classifies the test
split with and without ERC, and ``export`` writes equilibrium-space
coordinates as CSV for external plotting tools.
"""
from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import artifacts
from .classifier import classify_dataset
from .dataset import (
    LabeledDataset, ResizeSpec, class_order, column_bounds, load_idx, minmax_normalize,
    partition_by_class, read_csv_table, resize, stratified_subset,
)
from .equilibrium import SolverConfig, project_classes, solve_equilibrium
from .erc import erc_correct_batch
from .errors import DomainError, FormatError, ShapeError
from .summaries import summarize_all
from .transform import PAPER_SCHEDULE, TrainConfig, default_hidden, forward, init_model, train

log = logging.getLogger(__name__)

# Coulomb constant per (dataset, resolution) used in the published experiments
DEFAULT_K = {
    ("cifar10", "8"): 1.0, ("cifar10", "16"): 128.0, ("cifar10", "native"): 2048.0,
    ("mnist", "8"): 1.0, ("mnist", "16"): 1.0, ("mnist", "native"): 1.0,
    ("fmnist", "8"): 1.0, ("fmnist", "16"): 1.0, ("fmnist", "native"): 1.0,
    ("norb", "8"): 1.0, ("norb", "16"): 1.0, ("norb", "native"): 512.0,
}

REPORT_FILES = {False: "report_before_erc.json", True: "report_after_erc.json"}


def parse_schedule(text: str) -> tuple:
    """``"1e-4:20,1e-5:10"`` -> ``((20, 1e-4), (10, 1e-5))``."""
    segments = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        rate, sep, epochs = part.partition(":")
        try:
            segments.append((int(epochs) if sep else 10**9, float(rate)))
        except ValueError:
            raise DomainError(f"bad learning-rate segment {part!r}; use RATE:EPOCHS") from None
    if not segments:
        raise DomainError("empty learning-rate schedule")
    return tuple(segments)


def format_schedule(schedule) -> str:
    return ",".join(f"{rate:g}:{n}" for n, rate in schedule)


@dataclass
class PipelineConfig:
    model_dir: str = "model"
    data_format: str = "idx"  # idx | csv
    train_images: str = ""
    train_labels: str = ""
    test_images: str = ""
    test_labels: str = ""
    train_csv: str = ""
    test_csv: str = ""
    label_column: int = -1
    channels: int = 1
    dataset_name: str = ""
    resolution: str = "native"  # 8 | 16 | native
    max_train: int | None = None
    max_test: int | None = None
    k: float | None = None
    tolerance: float = 1e-4
    max_iterations: int = 10_000
    initial_step: float = 0.1
    step_decay: float = 0.5
    step_growth: float = 2.0
    jitter_scale: float = 1e-6
    hidden: tuple | None = None
    epochs: int = 30
    batch_size: int = 64
    lr: tuple = PAPER_SCHEDULE
    rho: float = 0.9
    opt_eps: float = 1e-8
    erc: str = "both"  # both | on | off
    erc_direct: bool = False
    spread_weighted_classify: bool = False
    per_sample: bool = False
    seed: int = 0

    def __post_init__(self):
        self.resolution = str(self.resolution)
        if self.resolution not in ("8", "16", "native"):
            raise DomainError(f"resolution must be 8, 16 or native, got {self.resolution!r}")
        if self.data_format not in ("idx", "csv"):
            raise DomainError(f"data_format must be idx or csv, got {self.data_format!r}")
        if self.erc not in ("both", "on", "off"):
            raise DomainError(f"erc must be both, on or off, got {self.erc!r}")
        if isinstance(self.lr, str):
            self.lr = parse_schedule(self.lr)
        if isinstance(self.hidden, str):
            self.hidden = tuple(int(h) for h in self.hidden.replace(",", " ").split())
        if self.hidden is not None:
            self.hidden = tuple(int(h) for h in self.hidden)

    @property
    def path(self) -> Path:
        return Path(self.model_dir)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            tolerance=self.tolerance, max_iterations=self.max_iterations,
            initial_step=self.initial_step, step_decay=self.step_decay,
            step_growth=self.step_growth, jitter_scale=self.jitter_scale, seed=self.seed,
        )

    def train_config(self) -> TrainConfig:
        schedule, left = [], self.epochs
        for n, rate in self.lr:
            take = min(n, left)
            if take:
                schedule.append((take, rate))
            left -= take
        if left:
            raise DomainError(f"learning-rate schedule covers fewer than {self.epochs} epochs")
        return TrainConfig(
            epochs=self.epochs, batch_size=self.batch_size, schedule=tuple(schedule),
            rho=self.rho, eps=self.opt_eps, seed=self.seed,
        )

    def resolve_k(self) -> float:
        if self.k is not None:
            return float(self.k)
        return DEFAULT_K.get((self.dataset_name.lower(), self.resolution), 1.0)

    @classmethod
    def from_mapping(cls, values: dict) -> "PipelineConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            name = key.strip().replace("-", "_")
            if name not in known:
                raise DomainError(f"unknown config key {key!r}")
            kwargs[name] = _coerce(name, raw)
        return cls(**kwargs)


_INT_FIELDS = {"label_column", "channels", "max_train", "max_test", "max_iterations",
               "epochs", "batch_size", "seed"}
_FLOAT_FIELDS = {"k", "tolerance", "initial_step", "step_decay", "step_growth",
                 "jitter_scale", "rho", "opt_eps"}
_BOOL_FIELDS = {"erc_direct", "spread_weighted_classify", "per_sample"}


def _coerce(name: str, raw):
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    if name in _INT_FIELDS:
        return None if raw.lower() in ("", "none") else int(raw)
    if name in _FLOAT_FIELDS:
        return None if raw.lower() in ("", "none") else float(raw)
    if name in _BOOL_FIELDS:
        return raw.lower() in ("1", "true", "yes", "on")
    return raw


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise FormatError(f"{path}:{lineno}: expected 'key = value'")
            values[key.strip()] = value.strip()
    return values


# ---------------------------------------------------------------------------
# data


def _load_raw(config: PipelineConfig, split: str, bounds=None) -> tuple:
    """Returns ``(dataset, image_side, bounds)`` before resizing."""
    if config.data_format == "idx":
        images = config.train_images if split == "train" else config.test_images
        labels = config.train_labels if split == "train" else config.test_labels
        if not images or not labels:
            raise DomainError(f"no {split} IDX paths configured")
        ds = load_idx(images, labels)
        side = int(round(np.sqrt(ds.dim / config.channels)))
        return ds, side, None
    path = config.train_csv if split == "train" else config.test_csv
    if not path:
        raise DomainError(f"no {split} CSV path configured")
    raw, labels = read_csv_table(path, config.label_column)
    if bounds is None:
        bounds = column_bounds(raw)
    ds = LabeledDataset(minmax_normalize(raw, bounds), labels, int(labels.max()) + 1)
    side = int(round(np.sqrt(ds.dim / config.channels)))
    if config.channels * side * side != ds.dim:
        side = None
    return ds, side, bounds


def load_split(config: PipelineConfig, split: str, n_classes: int | None = None,
               bounds=None) -> tuple:
    """Load, subsample and resize one split; returns ``(dataset, bounds)``."""
    ds, side, bounds = _load_raw(config, split, bounds)
    if n_classes is not None and ds.n_classes != n_classes:
        if ds.labels.size and ds.labels.max() >= n_classes:
            raise ShapeError(f"{split} labels exceed the model's {n_classes} classes")
        ds = LabeledDataset(ds.features, ds.labels, n_classes)
    limit = config.max_train if split == "train" else config.max_test
    ds = stratified_subset(ds, limit, seed=config.seed)
    if config.resolution != "native":
        if side is None:
            raise ShapeError(f"cannot resize: d={ds.dim} is not {config.channels} square channel(s)")
        ds = resize(ds, ResizeSpec(int(config.resolution), side, config.channels))
    return ds, bounds


def training_pairs(train_ds: LabeledDataset, model) -> tuple:
    """Class-ordered ``(inputs, targets, labels)`` rows for the regressor."""
    classes = partition_by_class(train_ds)
    inputs = np.vstack(classes)
    targets = np.vstack(project_classes(classes, model))
    labels = train_ds.labels[class_order(train_ds)]
    return inputs, targets, labels


# ---------------------------------------------------------------------------
# model directory


def load_fit(config: PipelineConfig):
    d = config.path
    summaries = artifacts.load_summaries(d / artifacts.SUMMARIES_FILE)
    return artifacts.load_equilibrium(d / artifacts.EQUILIBRIUM_FILE, summaries)


def _load_bounds(config: PipelineConfig):
    if config.data_format != "csv":
        return None
    return artifacts.load_bounds(config.path / artifacts.BOUNDS_FILE)


def _manifest(config: PipelineConfig) -> dict:
    entries = {}
    for key, value in asdict(config).items():
        if key == "model_dir":
            # the manifest lives inside the directory; keep copies identical
            continue
        if key == "lr":
            value = format_schedule(value)
        elif key == "hidden" and value is not None:
            value = " ".join(str(h) for h in value)
        entries[key] = value
    return entries


def fit(config: PipelineConfig):
    """Compute the equilibrium space of the training split and write it out."""
    train_ds, bounds = load_split(config, "train")
    counts = train_ds.class_counts()
    if np.any(counts == 0):
        raise DomainError(f"classes {np.flatnonzero(counts == 0).tolist()} have no training samples")
    classes = partition_by_class(train_ds)
    summaries = summarize_all(classes)
    model = solve_equilibrium(summaries, config.resolve_k(), config.solver_config())

    out = config.path
    out.mkdir(parents=True, exist_ok=True)
    # a refit invalidates everything derived from the previous fit
    for stale in (artifacts.CHECKPOINT_FILE, artifacts.LOSS_FILE, artifacts.MANIFEST_FILE,
                  artifacts.BOUNDS_FILE, *REPORT_FILES.values()):
        if (out / stale).exists():
            os.unlink(out / stale)
    artifacts.atomic_write(out / artifacts.SUMMARIES_FILE, artifacts.dump_summaries(summaries))
    artifacts.atomic_write(out / artifacts.EQUILIBRIUM_FILE, artifacts.dump_equilibrium(model))
    inputs, targets, labels = training_pairs(train_ds, model)
    artifacts.atomic_write(
        out / artifacts.PROJECTED_FILE, artifacts.dump_embeddings(labels, targets, "projected-train")
    )
    if bounds is not None:
        artifacts.atomic_write(out / artifacts.BOUNDS_FILE, artifacts.dump_bounds(*bounds))
    artifacts.atomic_write(out / artifacts.MANIFEST_FILE, artifacts.dump_manifest(_manifest(config)))
    return model


def train_transform(config: PipelineConfig):
    """Fit the regressor from training inputs to their projected positions."""
    model = load_fit(config)
    train_ds, _ = load_split(config, "train", model.n_classes, _load_bounds(config))
    if train_ds.dim != model.dim:
        raise ShapeError(f"training data has d={train_ds.dim}, fitted model d={model.dim}")
    inputs, targets, _ = training_pairs(train_ds, model)
    hidden = config.hidden if config.hidden is not None else default_hidden(model.dim)
    transform = init_model(model.dim, hidden, seed=config.seed)
    transform = train(transform, inputs, targets, config.train_config())
    artifacts.atomic_write(config.path / artifacts.CHECKPOINT_FILE, artifacts.dump_checkpoint(transform))
    artifacts.atomic_write(config.path / artifacts.LOSS_FILE, artifacts.dump_loss_history(transform))
    return transform


def load_all(config: PipelineConfig) -> tuple:
    model = load_fit(config)
    transform = artifacts.load_checkpoint(config.path / artifacts.CHECKPOINT_FILE)
    if transform.dim != model.dim:
        raise ShapeError(f"checkpoint d={transform.dim} does not match equilibrium d={model.dim}")
    if config.k is not None:
        model = model.with_k(float(config.k))
    return model, transform


def evaluate(config: PipelineConfig, write: bool = True) -> dict:
    """Classify the test split; returns ``{use_erc: ClassificationReport}``."""
    model, transform = load_all(config)
    test_ds, _ = load_split(config, "test", model.n_classes, _load_bounds(config))
    if test_ds.dim != model.dim:
        raise ShapeError(f"test data has d={test_ds.dim}, model expects d={model.dim}")
    modes = {"both": (False, True), "on": (True,), "off": (False,)}[config.erc]
    reports = {}
    for use_erc in modes:
        report = classify_dataset(
            test_ds, transform, model, use_erc=use_erc, erc_direct=config.erc_direct,
            spread_weighted=config.spread_weighted_classify,
        )
        reports[use_erc] = report
        if write:
            artifacts.atomic_write(config.path / REPORT_FILES[use_erc], report.to_json(config.per_sample))
    return reports


def export_embeddings(config: PipelineConfig, split: str, output=None) -> Path:
    """Write ``label, e_1..e_d`` equilibrium-space coordinates for a split."""
    if split not in ("train", "test"):
        raise DomainError(f"split must be train or test, got {split!r}")
    output = Path(output) if output else config.path / f"embeddings_{split}.csv"
    if split == "train":
        model = load_fit(config)
        ds, _ = load_split(config, "train", model.n_classes, _load_bounds(config))
        points = ds.features + model.deltas[ds.labels]
    else:
        model, transform = load_all(config)
        ds, _ = load_split(config, "test", model.n_classes, _load_bounds(config))
        if ds.dim != model.dim:
            raise ShapeError(f"test data has d={ds.dim}, model expects d={model.dim}")
        points = forward(transform, ds.features)
        if config.erc != "off":
            _, _, points, _ = erc_correct_batch(ds.features, points, model)
    artifacts.atomic_write(output, artifacts.dump_embeddings(ds.labels, points))
    return output


def with_overrides(config: PipelineConfig, **overrides) -> PipelineConfig:
    return replace(config, **overrides)
