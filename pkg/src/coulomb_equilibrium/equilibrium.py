"""Force-equilibrium solver and class projection.

The class charges repel each other until the total force magnitude of the
system drops below a tolerance. Pure repulsion has no finite fixed point, so
"equilibrium" is the first configuration whose total force is at most
``tolerance``.

The solver follows the forces, ``R <- R + step * F``, with an adaptive step:
a trial that does not strictly lower the total force is rejected and the step
shrinks by ``step_decay``; an accepted trial grows the step by
``step_growth``. Forces decay as ``1/r**2`` while the charges spread out, so
without growth the step needed to keep making progress would quickly fall out
of reach of the iteration budget.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .electrostatics import SINGULAR_DISTANCE, ChargeSystem, net_forces
from .errors import DomainError, ShapeError, SingularityError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-4
    max_iterations: int = 10_000
    initial_step: float = 0.1
    step_decay: float = 0.5
    step_growth: float = 2.0
    jitter_scale: float = 1e-6
    seed: int = 0
    # keep the charge centroid fixed at the centroid of the class means
    recenter: bool = True

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError("tolerance must be positive")
        if not 0 < self.step_decay < 1:
            raise DomainError("step_decay must lie in (0, 1)")
        if not self.step_growth >= 1:
            raise DomainError("step_growth must be >= 1")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        if not self.initial_step > 0:
            raise DomainError("initial_step must be positive")
        if self.jitter_scale < 0:
            raise DomainError("jitter_scale must be non-negative")


@dataclass(frozen=True)
class EquilibriumModel:
    equilibrium_positions: np.ndarray
    deltas: np.ndarray
    summaries: list
    k: float
    final_total_force: float
    iterations_used: int
    converged: bool
    tolerance: float = 1e-4
    # accepted total-force values, starting with the initial configuration
    history: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n_classes(self) -> int:
        return self.equilibrium_positions.shape[0]

    @property
    def dim(self) -> int:
        return self.equilibrium_positions.shape[1]

    @property
    def charges(self) -> np.ndarray:
        return np.array([s.charge for s in self.summaries], dtype=np.float64)

    @property
    def spreads(self) -> np.ndarray:
        return np.vstack([s.spread for s in self.summaries])

    def with_k(self, k: float) -> "EquilibriumModel":
        """Same geometry, different force constant (used for classification)."""
        return EquilibriumModel(
            self.equilibrium_positions, self.deltas, self.summaries, k,
            self.final_total_force, self.iterations_used, self.converged,
            self.tolerance, self.history,
        )


def _coincident_rows(positions: np.ndarray) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(dist, np.inf)
    return np.flatnonzero((dist < SINGULAR_DISTANCE).any(axis=1))


def _recenter(positions: np.ndarray, centroid) -> np.ndarray:
    if centroid is None:
        return positions
    return positions - positions.mean(axis=0) + centroid


def solve_equilibrium(summaries, k: float = 1.0, config: SolverConfig | None = None) -> EquilibriumModel:
    """Drive the class charges to total force ``<= config.tolerance``.

    Returns positions re-centred on the centroid of the class means (unless
    ``config.recenter`` is off); ``deltas`` are the per-class shifts from the
    class means to those positions.
    """
    config = config or SolverConfig()
    summaries = list(summaries)
    if not summaries:
        raise DomainError("need at least one class")
    start = np.vstack([s.position for s in summaries])
    n = start.shape[0]
    if n == 1:
        return EquilibriumModel(
            start.copy(), np.zeros_like(start), summaries, k, 0.0, 0, True,
            config.tolerance, np.zeros(1),
        )
    for s in summaries:
        if not s.charge > 0:
            raise DomainError(
                f"class {s.class_id} has zero charge (degenerate: {s.count} sample(s) "
                "or zero spread); it can neither feel nor exert force"
            )

    centroid = start.mean(axis=0) if config.recenter else None
    positions = start.copy()
    clash = _coincident_rows(positions)
    if clash.size:
        if config.jitter_scale == 0:
            raise SingularityError(f"classes {clash.tolist()} share a position and jitter is disabled")
        rng = np.random.default_rng(config.seed)
        noise = rng.uniform(-config.jitter_scale, config.jitter_scale, size=positions.shape)
        positions[clash] += noise[clash]
        positions = _recenter(positions, centroid)
        clash = _coincident_rows(positions)
        if clash.size:
            raise SingularityError(f"classes {clash.tolist()} still coincide after jitter")

    system = ChargeSystem.from_summaries(summaries, k, positions)
    state = net_forces(system)
    history = [state.total_magnitude]
    step = config.initial_step
    min_step = config.initial_step * 1e-12
    iterations = 0
    while state.total_magnitude > config.tolerance and iterations < config.max_iterations:
        iterations += 1
        trial_positions = _recenter(system.positions + step * state.per_charge_force, centroid)
        try:
            trial = net_forces(system.moved(trial_positions))
        except SingularityError:
            trial = None
        if trial is not None and trial.total_magnitude < state.total_magnitude:
            system, state = system.moved(trial_positions), trial
            history.append(state.total_magnitude)
            step *= config.step_growth
            continue
        step *= config.step_decay
        if step < min_step:
            # Force-following has stalled. A uniform dilation scales every
            # pairwise force by 1/4, so it always makes progress.
            log.debug("force step stalled at iteration %d; dilating", iterations)
            middle = system.positions.mean(axis=0)
            trial_positions = _recenter(2.0 * (system.positions - middle) + middle, centroid)
            trial = net_forces(system.moved(trial_positions))
            if trial.total_magnitude < state.total_magnitude:
                system, state = system.moved(trial_positions), trial
                history.append(state.total_magnitude)
            step = config.initial_step

    converged = state.total_magnitude <= config.tolerance
    if not converged:
        log.warning(
            "equilibrium not reached after %d iterations (total force %.3g > %.3g)",
            iterations, state.total_magnitude, config.tolerance,
        )
    return EquilibriumModel(
        equilibrium_positions=system.positions,
        deltas=system.positions - start,
        summaries=summaries,
        k=k,
        final_total_force=state.total_magnitude,
        iterations_used=iterations,
        converged=bool(converged),
        tolerance=config.tolerance,
        history=np.array(history),
    )


def project_classes(classes, model: EquilibriumModel) -> list:
    """Translate every class by its shift vector."""
    classes = list(classes)
    if len(classes) != model.n_classes:
        raise ShapeError(f"{len(classes)} classes given, model has {model.n_classes}")
    out = []
    for i, points in enumerate(classes):
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != model.dim:
            raise ShapeError(f"class {i}: expected (m, {model.dim}), got {points.shape}")
        out.append(points + model.deltas[i])
    return out
