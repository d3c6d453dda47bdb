import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stlpi2.objectives import (
    InputEnergy, PenaltySchedule, TimeToReach, cost, normalize_costs, objective, penalty,
)
from stlpi2.stl import Pred, Trajectory, parse_formula
from stlpi2.stl.predicates import BallInside

GOAL = BallInside("goal", 2, (0, 1), (1.0, 3.5), 0.2)

# multiples of 1/8 keep shifts exact, so invariance is tested without absorption
finite_costs = st.lists(st.integers(-10**6, 10**6).map(lambda v: v / 8), min_size=2, max_size=40)


def test_penalty_examples():
    assert penalty(2000.0, 0.05, 0.05) == 0.0
    assert penalty(2000.0, 5.05, 0.05) == 0.0
    assert penalty(2000.0, -0.95, 0.05) == pytest.approx(2000.0, rel=1e-12)
    assert np.array_equal(penalty(1.0, np.array([0.0, 2.0]), 1.0), [1.0, 0.0])


def test_penalty_smooth_at_threshold():
    h = 1e-5
    assert penalty(50.0, 0.02 - h, 0.02) < 1e-12
    slope = (penalty(50.0, 0.02, 0.02) - penalty(50.0, 0.02 - h, 0.02)) / h
    assert abs(slope) < 1e-6


def test_objective_examples():
    assert objective(4.5, 0.1, 2000.0, 0.05) == 4.5
    assert objective(0.0, -0.5, 10.0, 0.5) == pytest.approx(10.0)
    assert objective(4.87, -2.39, 2.0, 0.02) == pytest.approx(4.87 + 2 * 2.41 ** 3, rel=1e-12)
    assert objective(4.87, -2.39, 2.0, 0.02) == pytest.approx(32.87, abs=5e-3)


@settings(max_examples=100)
@given(c=st.floats(0, 1e3), rho=st.floats(0.05, 10), lam=st.floats(0, 1e5))
def test_objective_is_cost_when_satisfied(c, rho, lam):
    assert objective(c, rho, lam, 0.05) == c


def test_normalize_examples():
    assert np.array_equal(normalize_costs([3.0, 3.0, 3.0], 25), [0.0, 0.0, 0.0])
    out = normalize_costs([0.0, 1.0, 2.0, 3.0], 50, h=10, eta=1)
    assert np.allclose(out, [0.0, -20 / 3, -40 / 3, -20.0], rtol=1e-15, atol=1e-14)
    out = normalize_costs([5.0, 2.0, np.inf, 9.0], 50)
    assert out[1] == 0.0 and out[2] == -np.inf


@settings(max_examples=200)
@given(J=finite_costs, shift=st.integers(-1000, 1000), eps=st.floats(1, 100))
def test_normalize_shift_invariant_and_monotone(J, shift, eps):
    J = np.array(J)
    a = normalize_costs(J, eps)
    b = normalize_costs(J + shift, eps)
    assert np.allclose(a, b, rtol=1e-9, atol=1e-9)
    assert a[np.argmin(J)] == 0.0
    order = np.argsort(J, kind="stable")
    assert np.all(np.diff(a[order]) <= 1e-12)


def test_normalize_validates():
    with pytest.raises(ValueError):
        normalize_costs([1.0], 25)
    with pytest.raises(ValueError):
        normalize_costs([1.0, 2.0], 0)


def _traj(states, dt=0.5, inputs=None):
    states = np.asarray(states, dtype=float)
    if inputs is None:
        inputs = np.zeros((len(states) - 1, 2))
    return Trajectory(dt, states, np.asarray(inputs, dtype=float))


def test_time_to_reach():
    spec = TimeToReach(Pred(GOAL), 0.05)
    at_goal = _traj([[1.0, 3.5], [1.0, 3.5]])
    assert cost(spec, at_goal) == 0.0
    path = _traj([[1.0, 2.0], [1.0, 3.0], [1.0, 3.4], [1.0, 3.5]])
    assert cost(spec, path) == pytest.approx(1.0)
    # never reaching rho_min falls back to the time of the best robustness
    short = _traj([[1.0, 2.0], [1.0, 3.0], [1.0, 3.2], [1.0, 3.1]])
    assert cost(spec, short) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        TimeToReach(parse_formula("F[0,1] goal", {"goal": GOAL}), 0.05)


def test_input_energy():
    L = 200
    u = np.tile([0.6, 0.8], (L, 1))
    traj = _traj(np.zeros((L + 1, 2)), dt=0.05, inputs=u)
    assert cost(InputEnergy(), traj) == pytest.approx(10.0, rel=1e-12)


def test_penalty_schedule():
    s = PenaltySchedule(2.0, 2000.0, "logarithmic")
    v = s.values(25)
    assert v[0] == 2.0 and v[-1] == 2000.0
    assert v[1] == pytest.approx(2.0 * 1000 ** (1 / 25))
    assert np.all(np.diff(v) > 0)
    lin = PenaltySchedule(2.0, 50000.0, "linear").values(50)
    assert np.allclose(np.diff(lin), (50000.0 - 2.0) / 50)
    assert PenaltySchedule(2.0, 10.0).values(0).tolist() == [2.0]
    for bad in [(0.0, 1.0), (5.0, 1.0)]:
        with pytest.raises(ValueError):
            PenaltySchedule(*bad)
    with pytest.raises(ValueError):
        PenaltySchedule(1.0, 2.0, "cubic")
    assert math.isclose(PenaltySchedule(2.0, 2.0).value(3, 5), 2.0)
