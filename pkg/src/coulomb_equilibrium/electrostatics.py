"""Coulomb force kernel.

Like charges repel: the force on charge ``i`` due to ``j`` points from
``R_j`` to ``R_i`` and has magnitude ``k Q_i Q_j / |R_i - R_j|**2``. During
equilibrium solving the force exerted by ``j`` is additionally scaled,
component by component, by the spread vector ``S_j`` of the class it
represents.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError, SingularityError

# separations below this are treated as coincident charges
SINGULAR_DISTANCE = 1e-9


@dataclass(frozen=True)
class ChargeSystem:
    charges: np.ndarray
    positions: np.ndarray
    spreads: np.ndarray
    k: float = 1.0

    def __post_init__(self):
        charges = np.asarray(self.charges, dtype=np.float64).reshape(-1)
        positions = np.atleast_2d(np.asarray(self.positions, dtype=np.float64))
        spreads = np.atleast_2d(np.asarray(self.spreads, dtype=np.float64))
        if positions.shape[0] != charges.shape[0] or spreads.shape != positions.shape:
            raise ShapeError(
                f"charges {charges.shape}, positions {positions.shape} and "
                f"spreads {spreads.shape} disagree"
            )
        if not self.k > 0:
            raise DomainError(f"k must be positive, got {self.k}")
        if np.any(charges <= 0):
            raise DomainError("all charges must be positive")
        object.__setattr__(self, "charges", charges)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "spreads", spreads)

    @classmethod
    def from_summaries(cls, summaries, k: float = 1.0, positions=None) -> "ChargeSystem":
        charges = [s.charge for s in summaries]
        if positions is None:
            positions = np.vstack([s.position for s in summaries])
        spreads = np.vstack([s.spread for s in summaries])
        return cls(charges, positions, spreads, k)

    @property
    def n(self) -> int:
        return self.charges.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def moved(self, positions) -> "ChargeSystem":
        return ChargeSystem(self.charges, positions, self.spreads, self.k)


@dataclass(frozen=True)
class ForceState:
    per_charge_force: np.ndarray  # (n, d)
    total_magnitude: float


def pairwise_force(i: int, j: int, system: ChargeSystem, weighted: bool = True) -> np.ndarray:
    """Repulsive force on charge ``i`` due to charge ``j``."""
    if i == j:
        raise DomainError("a charge exerts no force on itself")
    diff = system.positions[i] - system.positions[j]
    dist = np.sqrt(diff @ diff)
    if dist < SINGULAR_DISTANCE:
        raise SingularityError(f"charges {i} and {j} coincide (separation {dist:.3g})")
    force = system.k * system.charges[i] * system.charges[j] / dist**3 * diff
    if weighted:
        force = force * system.spreads[j]
    return force


def net_forces(system: ChargeSystem, weighted: bool = True) -> ForceState:
    """Superposed force on every charge and the total magnitude ``sum |F_i|``.

    The per-charge sum runs over ``j`` in ascending order, so results are
    bit-reproducible for a given input.
    """
    R, Q = system.positions, system.charges
    n = system.n
    diff = R[:, None, :] - R[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    off = ~np.eye(n, dtype=bool)
    if n > 1:
        closest = dist[off].min()
        if closest < SINGULAR_DISTANCE:
            i, j = np.argwhere(off & (dist == closest))[0]
            raise SingularityError(f"charges {i} and {j} coincide (separation {closest:.3g})")
    coef = np.zeros((n, n))
    coef[off] = system.k * np.outer(Q, Q)[off] / dist[off] ** 3
    contrib = coef[:, :, None] * diff
    if weighted:
        contrib = contrib * system.spreads[None, :, :]
    forces = np.zeros_like(R)
    for j in range(n):
        forces += contrib[:, j, :]
    total = float(np.sqrt(np.einsum("ij,ij->i", forces, forces)).sum())
    return ForceState(forces, total)


def attraction_magnitude(test_position, summary, equilibrium_position, k: float = 1.0) -> float:
    """Attraction between a unit test charge and a class charge.

    ``summary`` may be a :class:`ClassSummary` or a bare charge value.
    Returns ``inf`` when the test point sits on the class charge.
    """
    charge = getattr(summary, "charge", summary)
    diff = np.asarray(test_position, dtype=np.float64) - np.asarray(equilibrium_position, dtype=np.float64)
    dist2 = float(diff @ diff)
    if dist2 == 0.0:
        return np.inf
    return k * charge / dist2


def attraction_matrix(points, charges, positions, k: float = 1.0, spreads=None,
                      chunk: int = 4096) -> np.ndarray:
    """``(N, n)`` attraction magnitudes of every point toward every charge.

    With ``spreads`` given, each force vector is scaled componentwise by the
    class spread before taking its norm. Coincident pairs get ``inf``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    positions = np.atleast_2d(np.asarray(positions, dtype=np.float64))
    charges = np.asarray(charges, dtype=np.float64)
    if points.shape[1] != positions.shape[1]:
        raise ShapeError(f"points have d={points.shape[1]}, charges d={positions.shape[1]}")
    out = np.empty((points.shape[0], positions.shape[0]))
    for start in range(0, points.shape[0], chunk):
        diff = points[start:start + chunk, None, :] - positions[None, :, :]
        dist2 = np.einsum("ijk,ijk->ij", diff, diff)
        with np.errstate(divide="ignore", invalid="ignore"):
            if spreads is None:
                block = k * charges[None, :] / dist2
            else:
                weighted = diff * np.asarray(spreads)[None, :, :]
                num = np.sqrt(np.einsum("ijk,ijk->ij", weighted, weighted))
                block = k * charges[None, :] * num / dist2**1.5
        block[dist2 == 0.0] = np.inf
        out[start:start + chunk] = block
    return out
