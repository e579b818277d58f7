import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulomb_equilibrium.dataset import make_blobs, partition_by_class
from coulomb_equilibrium.electrostatics import ChargeSystem, net_forces
from coulomb_equilibrium.equilibrium import SolverConfig, project_classes, solve_equilibrium
from coulomb_equilibrium.errors import DomainError, ShapeError, SingularityError
from coulomb_equilibrium.summaries import ClassSummary, summarize_all


def charge(i, position, q=1.0, spread=None):
    position = np.asarray(position, dtype=float)
    spread = np.ones_like(position) if spread is None else np.asarray(spread, dtype=float)
    return ClassSummary(i, q, position, spread, 10)


def pairwise(points):
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def test_single_class():
    m = solve_equilibrium([charge(0, [0.2, 0.7])])
    np.testing.assert_array_equal(m.equilibrium_positions, [[0.2, 0.7]])
    np.testing.assert_array_equal(m.deltas, [[0, 0]])
    assert m.final_total_force == 0.0 and m.converged


@pytest.mark.parametrize("gap", [0.1, 1.0, 4.0])
def test_two_unit_charges(gap):
    m = solve_equilibrium([charge(0, [0, 0]), charge(1, [gap, 0])], config=SolverConfig(tolerance=0.02))
    assert m.converged
    sep = np.linalg.norm(m.equilibrium_positions[0] - m.equilibrium_positions[1])
    # 2 / sep**2 <= 0.02
    assert sep >= 10.0
    assert 2 / sep**2 == pytest.approx(m.final_total_force, rel=1e-12)


def test_equilateral_triangle_stays_equilateral():
    h = np.sqrt(3) / 2
    tri = [[0, 0], [0.1, 0], [0.05, 0.1 * h]]
    m = solve_equilibrium([charge(i, p) for i, p in enumerate(tri)])
    assert m.converged
    dist = pairwise(m.equilibrium_positions)[np.triu_indices(3, 1)]
    assert dist.max() / dist.min() - 1 < 0.01


def test_spread_pushes_along_the_wide_axis():
    # class 1 is wide along x, so class 2 is pushed mostly along x
    a = charge(0, [0, 0], spread=[4, 0.25])
    b = charge(1, [1, 1], spread=[0.25, 4])
    m = solve_equilibrium([a, b], config=SolverConfig(recenter=False))
    assert m.converged
    assert abs(m.deltas[1, 0]) > abs(m.deltas[1, 1])


def test_zero_charge_rejected():
    with pytest.raises(DomainError):
        solve_equilibrium([charge(0, [0, 0]), charge(1, [1, 0], q=0.0)])


def test_coincident_classes_are_jittered():
    m = solve_equilibrium([charge(0, [1, 1]), charge(1, [1, 1])])
    assert m.converged
    assert np.linalg.norm(m.equilibrium_positions[0] - m.equilibrium_positions[1]) > 1


def test_coincident_without_jitter():
    with pytest.raises(SingularityError):
        solve_equilibrium([charge(0, [1, 1]), charge(1, [1, 1])], config=SolverConfig(jitter_scale=0))


def test_config_validation():
    with pytest.raises(DomainError):
        SolverConfig(tolerance=0)
    with pytest.raises(DomainError):
        SolverConfig(step_decay=1.0)
    with pytest.raises(DomainError):
        SolverConfig(max_iterations=0)


def test_iteration_budget_exhausted():
    m = solve_equilibrium([charge(0, [0, 0]), charge(1, [0.1, 0])], config=SolverConfig(max_iterations=2))
    assert not m.converged and m.iterations_used == 2
    assert m.final_total_force > m.tolerance


def random_system(seed):
    rng = np.random.default_rng(seed)
    n, d = rng.integers(2, 11), rng.integers(2, 65)
    return [
        ClassSummary(i, float(rng.uniform(0.1, 5)), rng.random(d), np.ones(d), 10)
        for i in range(n)
    ]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_solver_invariants(seed):
    summaries = random_system(seed)
    m = solve_equilibrium(summaries)
    assert m.converged and m.final_total_force <= 1e-4
    assert np.all(np.diff(m.history) < 0)
    start = np.vstack([s.position for s in summaries])
    assert np.array_equal(m.deltas, m.equilibrium_positions - start)
    # re-centring keeps the centroid of the class means
    np.testing.assert_allclose(m.equilibrium_positions.mean(axis=0), start.mean(axis=0), atol=1e-9)
    # recorded force agrees with a fresh evaluation
    state = net_forces(ChargeSystem.from_summaries(summaries, 1.0, m.equilibrium_positions))
    assert state.total_magnitude == m.final_total_force


def test_solver_is_deterministic():
    a = solve_equilibrium(random_system(11))
    b = solve_equilibrium(random_system(11))
    assert a.equilibrium_positions.tobytes() == b.equilibrium_positions.tobytes()
    assert a.history.tobytes() == b.history.tobytes()
    assert a.iterations_used == b.iterations_used


def test_projection_zero_shift():
    m = solve_equilibrium([charge(0, [0, 0])])
    (out,) = project_classes([np.array([[1.0, 2.0], [3.0, 4.0]])], m)
    np.testing.assert_array_equal(out, [[1, 2], [3, 4]])


def test_projection_translates():
    m = solve_equilibrium([charge(0, [0.5, 0.5])])
    m = type(m)(m.equilibrium_positions + [3, -1], np.array([[3.0, -1.0]]), m.summaries,
                m.k, 0.0, 0, True)
    (out,) = project_classes([np.array([[0.0, 0.0], [1.0, 1.0]])], m)
    np.testing.assert_array_equal(out, [[3, -1], [4, 0]])
    assert np.linalg.norm(out[1] - out[0]) == pytest.approx(np.sqrt(2))


def test_projection_shape_checks():
    m = solve_equilibrium([charge(0, [0, 0]), charge(1, [1, 0])])
    with pytest.raises(ShapeError):
        project_classes([np.zeros((2, 2))], m)
    with pytest.raises(ShapeError):
        project_classes([np.zeros((2, 2)), np.zeros((2, 3))], m)


def test_blobs_move_apart():
    centers = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, np.sqrt(3)]])
    ds = make_blobs(centers, 0.5, 100, seed=0)
    classes = partition_by_class(ds)
    before = summarize_all(classes)
    m = solve_equilibrium(before)
    after = summarize_all(project_classes(classes, m))
    gap = lambda ss: pairwise(np.vstack([s.position for s in ss]))[np.triu_indices(3, 1)].min()
    assert gap(after) > gap(before)
    for b, a, delta in zip(before, after, m.deltas):
        np.testing.assert_allclose(a.spread, b.spread, rtol=0, atol=1e-12)
        np.testing.assert_allclose(a.position, b.position + delta, atol=1e-12)
    for c, p in zip(classes, project_classes(classes, m)):
        np.testing.assert_allclose(pairwise(p), pairwise(c), atol=1e-12)
