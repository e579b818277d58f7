"""Coulomb classification in equilibrium space and the evaluation report.

A test sample is mapped into equilibrium space, optionally corrected with
ERC, and assigned to the class charge that attracts it most strongly. Ties
go to the lowest class id; a sample sitting exactly on a charge goes to
that class.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import LabeledDataset
from .electrostatics import attraction_matrix
from .erc import erc_correct_batch
from .errors import ShapeError
from .transform import TransformModel, forward

REPORT_VERSION = "coulomb-equilibrium-report/1"


@dataclass
class ClassificationReport:
    predictions: np.ndarray
    per_sample_forces: np.ndarray
    confusion: np.ndarray
    erc_used: bool
    timing: dict
    true_labels: np.ndarray | None = None
    erc_classes: np.ndarray | None = None
    # rows whose transform output was non-finite; prediction is -1
    failures: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def n_samples(self) -> int:
        return self.predictions.shape[0]

    @property
    def accuracy(self) -> float | None:
        if self.true_labels is None or self.n_samples == 0:
            return None
        return float(np.trace(self.confusion)) / self.n_samples

    def to_dict(self, per_sample: bool = False) -> dict:
        out = {"format_version": REPORT_VERSION}
        if self.accuracy is not None:
            out["accuracy"] = self.accuracy
        out["n_samples"] = self.n_samples
        out["n_failures"] = int(self.failures.sum())
        out["confusion"] = self.confusion.astype(int).tolist()
        out["timing_seconds"] = {k: float(v) for k, v in self.timing.items()}
        out["erc_used"] = bool(self.erc_used)
        if per_sample:
            rows = []
            for i in range(self.n_samples):
                row = {
                    "prediction": int(self.predictions[i]),
                    "forces": [float(f) for f in self.per_sample_forces[i]],
                }
                if self.true_labels is not None:
                    row["label"] = int(self.true_labels[i])
                if self.erc_classes is not None:
                    row["erc_class"] = int(self.erc_classes[i])
                rows.append(row)
            out["per_sample"] = rows
        return out

    def to_json(self, per_sample: bool = False) -> str:
        return json.dumps(self.to_dict(per_sample), indent=2) + "\n"


def classify_forces(forces: np.ndarray) -> np.ndarray:
    """Row-wise argmax with lowest-id tie-break; ``inf`` wins outright."""
    return np.argmax(forces, axis=1) if forces.shape[1] else np.zeros(forces.shape[0], dtype=int)


def classify_point(t_equilibrium, model, spread_weighted: bool = False) -> tuple:
    """``(class_id, forces)`` for a single equilibrium-space point."""
    t = np.asarray(t_equilibrium, dtype=np.float64)
    if t.shape != (model.dim,):
        raise ShapeError(f"expected a ({model.dim},) vector, got {t.shape}")
    forces = attraction_matrix(
        t[None, :], model.charges, model.equilibrium_positions, model.k,
        spreads=model.spreads if spread_weighted else None,
    )[0]
    return int(np.argmax(forces)), forces


def _apply_transform(transform, features: np.ndarray) -> np.ndarray:
    if transform is None:
        return features.copy()
    if isinstance(transform, TransformModel):
        return forward(transform, features)
    return np.asarray(transform(features), dtype=np.float64)


def confusion_matrix(true_labels, predictions, n_classes: int) -> np.ndarray:
    """Counts ``[true, predicted]``; rows with a negative prediction are skipped."""
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    ok = predictions >= 0
    np.add.at(confusion, (true_labels[ok], predictions[ok]), 1)
    return confusion


def classify_dataset(test, transform, model, use_erc: bool = False,
                     erc_direct: bool = False, spread_weighted: bool = False) -> ClassificationReport:
    """Transform, optionally ERC-correct, and classify every test row.

    ``test`` is a :class:`LabeledDataset` or a bare ``(N, d)`` matrix.
    ``transform`` is a :class:`TransformModel`, any callable on ``(N, d)``
    arrays, or ``None`` for the identity. With ``erc_direct`` the ERC class
    is the prediction instead of re-running the force argmax on the
    corrected point.
    """
    if isinstance(test, LabeledDataset):
        features, labels = test.features, test.labels
    else:
        features, labels = np.atleast_2d(np.asarray(test, dtype=np.float64)), None
        if features.size == 0:
            features = features.reshape(0, model.dim)
    n_rows, d = features.shape
    if d != model.dim:
        raise ShapeError(f"test data has d={d}, model expects d={model.dim}")
    n_classes = model.n_classes
    timing = {"transform": 0.0, "erc": 0.0, "force": 0.0}

    t0 = time.perf_counter()
    mapped = _apply_transform(transform, features)
    timing["transform"] = time.perf_counter() - t0
    failures = ~np.all(np.isfinite(mapped), axis=1)

    erc_classes = None
    if use_erc:
        t0 = time.perf_counter()
        erc_classes = np.full(n_rows, -1, dtype=np.int64)
        ok = ~failures
        chosen, _, corrected, _ = erc_correct_batch(features[ok], mapped[ok], model)
        mapped = mapped.copy()
        mapped[ok] = corrected
        erc_classes[ok] = chosen
        timing["erc"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    forces = np.full((n_rows, n_classes), np.nan)
    predictions = np.full(n_rows, -1, dtype=np.int64)
    ok = ~failures
    if ok.any():
        forces[ok] = attraction_matrix(
            mapped[ok], model.charges, model.equilibrium_positions, model.k,
            spreads=model.spreads if spread_weighted else None,
        )
        predictions[ok] = classify_forces(forces[ok])
    if erc_direct and erc_classes is not None:
        snapped = erc_classes >= 0
        predictions[snapped] = erc_classes[snapped]
    timing["force"] = time.perf_counter() - t0

    confusion = (
        confusion_matrix(labels, predictions, n_classes)
        if labels is not None else np.zeros((n_classes, n_classes), dtype=np.int64)
    )
    return ClassificationReport(
        predictions=predictions,
        per_sample_forces=forces,
        confusion=confusion,
        erc_used=use_erc,
        timing=timing,
        true_labels=labels,
        erc_classes=erc_classes,
        failures=failures,
    )
