"""Labeled dataset ingestion: IDX ubyte and CSV readers, area-average
downsampling and per-class partitioning.

Features are always float64 rows of length ``d``; images are flattened
row-major, channel planes first (``C x H x W``).
"""
from __future__ import annotations

import csv
import gzip
import io
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError, FormatError, ParseError, ShapeError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix ``(N, d)`` with integer labels in ``[0, n_classes)``."""

    features: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels)
        if features.ndim != 2:
            raise ShapeError(f"features must be 2-D, got shape {features.shape}")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise ShapeError(
                f"labels shape {labels.shape} does not match {features.shape[0]} rows"
            )
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.round(labels)):
                raise DomainError("labels must be integers")
        labels = labels.astype(np.int64)
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise DomainError(f"labels must lie in [0, {self.n_classes})")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def subset(self, index) -> "LabeledDataset":
        index = np.asarray(index)
        return LabeledDataset(self.features[index], self.labels[index], self.n_classes)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class ResizeSpec:
    target_side: int
    source_side: int
    channels: int = 1

    def __post_init__(self):
        for name in ("target_side", "source_side", "channels"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value!r}")
        if self.target_side > self.source_side:
            raise DomainError(
                f"only downsampling is supported ({self.source_side} -> {self.target_side})"
            )


# ---------------------------------------------------------------------------
# IDX


def _read_bytes(path) -> bytes:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _idx_header(raw: bytes, magic: int, ndim: int, path) -> tuple:
    size = 4 + 4 * ndim
    if len(raw) < size:
        raise FormatError(f"{path}: truncated IDX header")
    (found,) = struct.unpack(">I", raw[:4])
    if found != magic:
        raise FormatError(f"{path}: bad IDX magic 0x{found:08x}, expected 0x{magic:08x}")
    return struct.unpack(f">{ndim}I", raw[4:size]), raw[size:]


def load_idx(images_path, labels_path, n_classes: int | None = None) -> LabeledDataset:
    """Read an IDX image/label file pair (optionally gzip-compressed).

    Pixel bytes are scaled by 1/255 and every image is flattened row-major.
    """
    (count, rows, cols), pixels = _idx_header(
        _read_bytes(images_path), IDX_IMAGES_MAGIC, 3, images_path
    )
    (n_labels,), label_bytes = _idx_header(
        _read_bytes(labels_path), IDX_LABELS_MAGIC, 1, labels_path
    )
    if count != n_labels:
        raise ConsistencyError(f"{count} images but {n_labels} labels")
    if len(pixels) != count * rows * cols:
        raise ConsistencyError(
            f"{images_path}: header promises {count * rows * cols} pixel bytes, found {len(pixels)}"
        )
    if len(label_bytes) != n_labels:
        raise ConsistencyError(
            f"{labels_path}: header promises {n_labels} labels, found {len(label_bytes)}"
        )
    images = np.frombuffer(pixels, dtype=np.uint8).reshape(count, rows * cols)
    labels = np.frombuffer(label_bytes, dtype=np.uint8).astype(np.int64)
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if labels.size else 0
    return LabeledDataset(images / 255.0, labels, n_classes)


def save_idx(dataset: LabeledDataset, images_path, labels_path, side: int | None = None):
    """Write ``dataset`` as an IDX pair; ``.gz`` paths are gzip-compressed.

    Features are mapped back to bytes with ``round(255 * x)``, which makes
    ``load_idx(save_idx(ds))`` bit-identical for data that came from bytes.
    """
    rows = cols = side if side is not None else int(round(np.sqrt(dataset.dim)))
    if rows * cols != dataset.dim:
        raise ShapeError(f"cannot lay out d={dataset.dim} as a square image")
    pixels = np.clip(np.rint(dataset.features * 255.0), 0, 255).astype(np.uint8)
    if dataset.labels.size and dataset.labels.max() > 255:
        raise DomainError("IDX labels are single bytes")
    image_blob = struct.pack(">IIII", IDX_IMAGES_MAGIC, dataset.n_samples, rows, cols)
    image_blob += pixels.tobytes()
    label_blob = struct.pack(">II", IDX_LABELS_MAGIC, dataset.n_samples)
    label_blob += dataset.labels.astype(np.uint8).tobytes()
    for path, blob in ((images_path, image_blob), (labels_path, label_blob)):
        if str(path).endswith(".gz"):
            # mtime=0 keeps the compressed bytes reproducible
            blob = gzip.compress(blob, mtime=0)
        with open(path, "wb") as fh:
            fh.write(blob)


# ---------------------------------------------------------------------------
# CSV


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def column_bounds(features: np.ndarray) -> tuple:
    """Per-column ``(min, max)`` of a raw feature matrix."""
    features = np.asarray(features, dtype=np.float64)
    return features.min(axis=0), features.max(axis=0)


def minmax_normalize(features: np.ndarray, bounds: tuple | None = None) -> np.ndarray:
    """Scale every column to [0, 1]; constant columns become 0.

    ``bounds`` lets a test split reuse the training split's ``(min, max)``;
    values outside those bounds are clipped.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] == 0:
        return features.copy()
    lo, hi = column_bounds(features) if bounds is None else bounds
    if np.shape(lo) != features.shape[1:] or np.shape(hi) != features.shape[1:]:
        raise ShapeError(
            f"data has d={features.shape[1]} columns, bounds cover {np.shape(lo)[0]}"
        )
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    out = np.clip((features - lo) / safe, 0.0, 1.0)
    out[:, span == 0] = 0.0
    return out


def read_csv_table(path, label_column: int = -1) -> tuple:
    """Parse a labeled CSV into ``(raw_features, labels)`` without normalizing."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise FormatError(f"{path}: no data rows")
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise FormatError(f"{path}: row {lineno} has {len(row)} cells, expected {width}")
    if width < 2:
        raise FormatError(f"{path}: need a label column and at least one feature column")
    try:
        table = np.array([[float(c) for c in row] for row in rows], dtype=np.float64)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not np.all(np.isfinite(table)):
        raise ParseError(f"{path}: non-finite value")
    col = label_column % width
    raw_labels = table[:, col]
    if np.any(raw_labels < 0) or np.any(raw_labels != np.round(raw_labels)):
        raise ParseError(f"{path}: label column {label_column} must hold non-negative integers")
    return np.delete(table, col, axis=1), raw_labels.astype(np.int64)


def load_csv(path, label_column: int = -1, n_classes: int | None = None,
             bounds: tuple | None = None) -> LabeledDataset:
    """Read a rectangular numeric CSV; one column holds the integer label.

    A first row containing any non-numeric cell is treated as a header.
    Feature columns are min-max normalized over the whole file unless
    ``bounds`` is given.
    """
    raw, labels = read_csv_table(path, label_column)
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    return LabeledDataset(minmax_normalize(raw, bounds), labels, n_classes)


def save_csv(dataset: LabeledDataset, path, header: bool = False):
    """Write ``label, f_1..f_d`` rows with 17 significant digits."""
    buf = io.StringIO()
    if header:
        buf.write(",".join(["label"] + [f"f{j + 1}" for j in range(dataset.dim)]) + "\n")
    for label, row in zip(dataset.labels, dataset.features):
        buf.write(",".join([str(int(label))] + [f"{v:.17g}" for v in row]) + "\n")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


# ---------------------------------------------------------------------------
# resampling


def area_weights(source: int, target: int) -> np.ndarray:
    """``(target, source)`` matrix of fractional overlaps between output bins
    ``[u*s/t, (u+1)*s/t)`` and source pixels ``[j, j+1)``, rows summing to 1."""
    # work in units of 1/target so bin edges are integers
    edges = np.arange(target + 1) * source
    pix = np.arange(source + 1) * target
    lo = np.maximum(edges[:-1, None], pix[None, :-1])
    hi = np.minimum(edges[1:, None], pix[None, 1:])
    return np.clip(hi - lo, 0, None) / float(source)


def resize(dataset: LabeledDataset, spec: ResizeSpec) -> LabeledDataset:
    """Downsample every image by exact area averaging.

    Each output pixel is the area-weighted mean of the source pixels its
    footprint covers. Weight rows sum to one, so every output stays in the
    convex hull of the input values and the image mean is preserved.
    """
    s, t, c = spec.source_side, spec.target_side, spec.channels
    if dataset.dim != c * s * s:
        raise ShapeError(f"d={dataset.dim} does not match {c} x {s} x {s}")
    if s == t:
        return LabeledDataset(dataset.features.copy(), dataset.labels.copy(), dataset.n_classes)
    weights = area_weights(s, t)
    images = dataset.features.reshape(-1, c, s, s)
    out = np.einsum("ui,ncij,vj->ncuv", weights, images, weights, optimize=True)
    return LabeledDataset(out.reshape(-1, c * t * t), dataset.labels.copy(), dataset.n_classes)


def partition_by_class(dataset: LabeledDataset) -> list:
    """Split features by label, preserving the input row order within a class."""
    return [dataset.features[dataset.labels == i] for i in range(dataset.n_classes)]


def class_order(dataset: LabeledDataset) -> np.ndarray:
    """Row indices that line up ``dataset`` with ``np.vstack(partition_by_class(...))``."""
    return np.argsort(dataset.labels, kind="stable")


# ---------------------------------------------------------------------------
# sampling helpers


def stratified_subset(dataset: LabeledDataset, max_samples: int, seed: int = 0) -> LabeledDataset:
    """Seeded class-balanced subsample of at most ``max_samples`` rows.

    Quotas are split as evenly as possible across classes (capped by class
    size); the selected rows keep their original relative order.
    """
    if max_samples is None or max_samples >= dataset.n_samples:
        return dataset
    rng = np.random.default_rng(seed)
    counts = dataset.class_counts()
    quota = np.zeros_like(counts)
    remaining = max_samples
    # water-fill quotas so small classes do not waste budget
    while remaining > 0:
        open_classes = np.flatnonzero(quota < counts)
        if open_classes.size == 0:
            break
        share = max(remaining // open_classes.size, 1)
        for i in open_classes:
            take = min(share, counts[i] - quota[i], remaining)
            quota[i] += take
            remaining -= take
            if remaining == 0:
                break
    chosen = []
    for i in range(dataset.n_classes):
        rows = np.flatnonzero(dataset.labels == i)
        chosen.append(rng.permutation(rows)[: quota[i]])
    return dataset.subset(np.sort(np.concatenate(chosen)))


def stratified_split(dataset: LabeledDataset, test_fraction: float, seed: int = 0):
    """Seeded per-class split into disjoint (train, test) datasets."""
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for i in range(dataset.n_classes):
        rows = rng.permutation(np.flatnonzero(dataset.labels == i))
        cut = int(round(len(rows) * test_fraction))
        test_idx.append(rows[:cut])
        train_idx.append(rows[cut:])
    return (
        dataset.subset(np.sort(np.concatenate(train_idx))),
        dataset.subset(np.sort(np.concatenate(test_idx))),
    )


def make_blobs(centers, sigma: float, per_class: int, seed: int = 0) -> LabeledDataset:
    """Isotropic Gaussian blobs, one class per center, rows interleaved by class.

    Features are returned raw (not normalized).
    """
    centers = np.asarray(centers, dtype=np.float64)
    rng = np.random.default_rng(seed)
    n, d = centers.shape
    labels = np.tile(np.arange(n), per_class)
    features = centers[labels] + sigma * rng.standard_normal((labels.size, d))
    return LabeledDataset(features, labels, n)
