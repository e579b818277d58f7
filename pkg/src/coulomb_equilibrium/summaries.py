"""Per-class charge summaries.

Each class is reduced to a point charge located at the class mean. The
charge magnitude is the class spread: the mean over dimensions of the
per-dimension population variance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError


@dataclass(frozen=True)
class ClassSummary:
    class_id: int
    charge: float
    position: np.ndarray
    spread: np.ndarray
    count: int

    @property
    def degenerate(self) -> bool:
        """True when the class exerts no force (single point or zero spread)."""
        return not self.charge > 0.0


def summarize_class(points, class_id: int = 0) -> ClassSummary:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ShapeError(f"class {class_id}: expected an (m, d) matrix, got {points.shape}")
    m, d = points.shape
    if m == 0:
        raise DomainError(f"class {class_id} has no samples")
    if d == 0:
        raise ShapeError(f"class {class_id}: zero-dimensional features")
    position = points.mean(axis=0)
    spread = points.var(axis=0)  # ddof=0: population variance
    return ClassSummary(
        class_id=int(class_id),
        charge=float(spread.mean()),
        position=position,
        spread=spread,
        count=m,
    )


def summarize_all(classes) -> list:
    """Summaries for a list of per-class matrices, in class-id order."""
    summaries = [summarize_class(points, i) for i, points in enumerate(classes)]
    dims = {s.position.shape[0] for s in summaries}
    if len(dims) > 1:
        raise ShapeError(f"classes disagree on dimensionality: {sorted(dims)}")
    return summaries


def stack(summaries) -> tuple:
    """``(charges, positions, spreads)`` arrays of shape ``(n,), (n, d), (n, d)``."""
    charges = np.array([s.charge for s in summaries], dtype=np.float64)
    positions = np.vstack([s.position for s in summaries])
    spreads = np.vstack([s.spread for s in summaries])
    return charges, positions, spreads
