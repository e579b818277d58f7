"""
How spread shapes the forces
============================

Two small experiments with hand-made charges: a wide class pushes its
neighbour along its wide axis, and a bigger charge can out-pull a nearer,
smaller one.

Run with ``python demos/spread_and_forces.py``.
"""
import numpy as np

from coulomb_equilibrium import (
    ClassSummary, EquilibriumModel, SolverConfig, attraction_magnitude, classify_point,
    solve_equilibrium,
)

# class 0 is wide along x, class 1 wide along y
a = ClassSummary(0, charge=2.125, position=np.array([0.0, 0.0]), spread=np.array([4.0, 0.25]), count=50)
b = ClassSummary(1, charge=2.125, position=np.array([1.0, 1.0]), spread=np.array([0.25, 4.0]), count=50)

# keep the raw trajectory (no re-centring) so the shifts are easy to read
model = solve_equilibrium([a, b], config=SolverConfig(recenter=False))
dx, dy = model.deltas[1]
print(f"class 1 moved by ({dx:.3f}, {dy:.3f}); the x push is {abs(dx / dy):.1f}x the y push")
dx, dy = model.deltas[0]
print(f"class 0 moved by ({dx:.3f}, {dy:.3f})")

# attraction: charge 4 at distance 2 against charge 1 at distance 1.5
strong = ClassSummary(0, 4.0, np.zeros(2), np.ones(2), 10)
weak = ClassSummary(1, 1.0, np.zeros(2), np.ones(2), 10)
print(f"\nforce from charge 4 at distance 2:   {attraction_magnitude([2.0, 0.0], strong, [0, 0]):.4f}")
print(f"force from charge 1 at distance 1.5: {attraction_magnitude([0.0, 1.5], weak, [0, 0]):.4f}")

# the same comparison as a classification
fixed = EquilibriumModel(
    equilibrium_positions=np.array([[0.0, 0.0], [2.0, 1.5]]), deltas=np.zeros((2, 2)),
    summaries=[strong, weak], k=1.0, final_total_force=0.0, iterations_used=0, converged=True,
)
cls, forces = classify_point([2.0, 0.0], fixed)
print(f"point (2, 0) -> class {cls}, forces {np.round(forces, 4)}")
