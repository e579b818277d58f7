import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulomb_equilibrium.electrostatics import (
    ChargeSystem, attraction_magnitude, attraction_matrix, net_forces, pairwise_force,
)
from coulomb_equilibrium.errors import DomainError, SingularityError
from coulomb_equilibrium.summaries import ClassSummary


def system(positions, charges=None, spreads=None, k=1.0):
    positions = np.asarray(positions, dtype=float)
    n, d = positions.shape
    charges = np.ones(n) if charges is None else charges
    spreads = np.ones((n, d)) if spreads is None else spreads
    return ChargeSystem(charges, positions, spreads, k)


def test_unit_pair_repels():
    s = system([[0, 0], [1, 0]])
    np.testing.assert_array_equal(pairwise_force(0, 1, s), [-1, 0])


def test_spread_weighting_scales_components():
    s = system([[0, 0], [1, 0]], spreads=[[1, 1], [2, 1]])
    np.testing.assert_array_equal(pairwise_force(0, 1, s), [-2, 0])


def test_scalar_magnitude():
    s = system([[0, 0, 0], [0, 2, 0]], charges=[3, 4], k=2)
    f = pairwise_force(0, 1, s, weighted=False)
    assert np.linalg.norm(f) == pytest.approx(2 * 3 * 4 / 2**2)


def test_newton_third_law():
    rng = np.random.default_rng(0)
    s = system(rng.random((2, 5)), charges=[0.7, 2.5], spreads=rng.random((2, 5)))
    np.testing.assert_array_equal(
        pairwise_force(0, 1, s, weighted=False), -pairwise_force(1, 0, s, weighted=False)
    )


def test_coincident_charges():
    s = system([[1, 1], [1, 1]])
    with pytest.raises(SingularityError):
        pairwise_force(0, 1, s)
    with pytest.raises(SingularityError):
        net_forces(s)


def test_self_force_rejected():
    with pytest.raises(DomainError):
        pairwise_force(0, 0, system([[0, 0], [1, 0]]))


def test_nonpositive_charge_rejected():
    with pytest.raises(DomainError):
        system([[0, 0], [1, 0]], charges=[1, 0])


def test_single_charge_feels_nothing():
    state = net_forces(system([[0.3, 0.2]]))
    np.testing.assert_array_equal(state.per_charge_force, [[0, 0]])
    assert state.total_magnitude == 0.0


def test_middle_of_three_is_balanced():
    state = net_forces(system([[-1, 0], [0, 0], [1, 0]]))
    np.testing.assert_array_equal(state.per_charge_force[1], [0, 0])


@pytest.mark.parametrize("d", [0.5, 1.0, 3.0, 10.0])
def test_pair_total_magnitude(d):
    state = net_forces(system([[0, 0], [d, 0]]))
    assert state.total_magnitude == pytest.approx(2 / d**2, rel=1e-14)


def test_net_forces_matches_pairwise_loop():
    rng = np.random.default_rng(3)
    s = system(rng.random((6, 4)), charges=rng.uniform(0.1, 5, 6), spreads=rng.random((6, 4)), k=1.7)
    state = net_forces(s)
    for i in range(6):
        expected = sum(pairwise_force(i, j, s) for j in range(6) if j != i)
        np.testing.assert_allclose(state.per_charge_force[i], expected, rtol=1e-12)
    assert state.total_magnitude == pytest.approx(
        sum(np.linalg.norm(f) for f in state.per_charge_force), rel=1e-14
    )


def test_net_forces_deterministic():
    rng = np.random.default_rng(4)
    s = system(rng.random((8, 16)), charges=rng.uniform(0.1, 5, 8))
    a, b = net_forces(s), net_forces(s)
    assert a.per_charge_force.tobytes() == b.per_charge_force.tobytes()
    assert a.total_magnitude == b.total_magnitude


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), shift=st.floats(-50, 50))
def test_translation_invariance(seed, shift):
    rng = np.random.default_rng(seed)
    pos = rng.random((4, 3)) * 4
    base = net_forces(system(pos)).per_charge_force
    moved = net_forces(system(pos + shift)).per_charge_force
    np.testing.assert_allclose(moved, base, rtol=1e-6, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_inverse_square(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.random(3), rng.random(3) + 1
    near = net_forces(system([a, b])).total_magnitude
    far = net_forces(system([a, a + 2 * (b - a)])).total_magnitude
    assert far == pytest.approx(near / 4, rel=1e-12)


def test_attraction_unit():
    assert attraction_magnitude([1, 0], 1.0, [0, 0], k=1) == 1.0


def test_bigger_charge_wins_from_farther_away():
    strong = ClassSummary(0, 4.0, np.zeros(2), np.ones(2), 10)
    weak = ClassSummary(1, 1.0, np.zeros(2), np.ones(2), 10)
    f_strong = attraction_magnitude([2, 0], strong, [0, 0])
    f_weak = attraction_magnitude([0, 1.5], weak, [0, 0])
    assert f_strong == pytest.approx(1.0)
    assert f_weak == pytest.approx(1 / 2.25)
    assert f_strong > f_weak


def test_attraction_coincident_is_infinite():
    assert attraction_magnitude([1, 2], 0.3, [1, 2]) == np.inf


@pytest.mark.parametrize("c", [0.01, 1.0, 7.5, 2048.0])
def test_attraction_linear_in_k(c):
    rng = np.random.default_rng(5)
    pts, pos, q = rng.random((20, 3)), rng.random((4, 3)), rng.uniform(0.1, 2, 4)
    base = attraction_matrix(pts, q, pos, k=1.0)
    np.testing.assert_allclose(attraction_matrix(pts, q, pos, k=c), c * base, rtol=1e-14)


def test_attraction_matrix_matches_scalar():
    rng = np.random.default_rng(6)
    pts, pos, q = rng.random((7, 5)), rng.random((3, 5)), rng.uniform(0.1, 2, 3)
    pts[2] = pos[1]
    mat = attraction_matrix(pts, q, pos, k=3.0, chunk=3)
    for a in range(7):
        for i in range(3):
            assert mat[a, i] == pytest.approx(attraction_magnitude(pts[a], q[i], pos[i], k=3.0), rel=1e-13)
    assert mat[2, 1] == np.inf


def test_spread_weighted_attraction():
    mat = attraction_matrix([[1.0, 0.0]], [1.0], [[0.0, 0.0]], spreads=[[3.0, 1.0]])
    assert mat[0, 0] == pytest.approx(3.0)
