import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import finite_difference_grad, materialize
from stlpi2.stl import (
    Always, And, BallInside, BallOutside, Eventually, FragmentError, FunctionPredicate,
    MidpointBall, Not, PairDistanceMax, PairDistanceMin, Pred, StlSyntaxError, Trajectory,
    TrueF, Until, WindowError, parse_formula, robustness, robustness_batch,
    robustness_signal, satisfied, smooth_robustness, to_text,
)


def linear_predicate(label, a, b):
    a = np.asarray(a, dtype=float)
    return FunctionPredicate(label, len(a), lambda x: x @ a - b,
                             lambda x: np.broadcast_to(a, np.shape(x)).copy())


def random_formula(rng, preds, depth, dt, horizon):
    if depth == 0 or rng.random() < 0.2:
        return Pred(preds[rng.integers(len(preds))])
    kind = rng.choice(["not", "and", "F", "G", "U", "true"], p=[0.15, 0.2, 0.22, 0.22, 0.16, 0.05])
    if kind == "true":
        return TrueF()
    sub = lambda: random_formula(rng, preds, depth - 1, dt, horizon)  # noqa: E731
    if kind == "not":
        return Not(sub())
    if kind == "and":
        return And(tuple(sub() for _ in range(rng.integers(2, 4))))
    # mix grid-aligned and off-grid bounds, some unbounded
    a = float(rng.integers(0, 4)) * dt * (1.0 if rng.random() < 0.7 else 1.37)
    b = math.inf if rng.random() < 0.25 else a + float(rng.integers(0, 8)) * dt * (1.0 if rng.random() < 0.7 else 0.61)
    if kind == "F":
        return Eventually(a, b, sub())
    if kind == "G":
        return Always(a, b, sub())
    return Until(a, b, sub(), sub())


def random_case(rng):
    n = int(rng.integers(1, 4))
    L = int(rng.integers(1, 51))
    dt = float(rng.choice([0.05, 0.1, 1.0]))
    states = np.cumsum(rng.normal(size=(L + 1, n)), axis=0)
    preds = [linear_predicate(f"p{i}", rng.normal(size=n), rng.normal()) for i in range(3)]
    preds.append(BallInside("ball", n, tuple(range(n)), tuple(rng.normal(size=n)), 1.5))
    formula = random_formula(rng, preds, 3, dt, L * dt)
    return formula, Trajectory(dt=dt, states=states)


# --- robustness examples -----------------------------------------------------

GOAL = BallInside("goal", 2, (0, 1), (1.0, 3.5), 0.2)
AVOID = BallOutside("avoid", 2, (0, 1), (2.5, 2.0), 1.2)
TABLE = {"goal": GOAL, "avoid": AVOID}


def test_predicate_at_goal_center():
    traj = Trajectory(dt=0.05, states=[[1.0, 3.5]] * 3)
    assert robustness(Pred(GOAL), traj, 0.0) == pytest.approx(0.2, abs=1e-15)


def test_always_on_constant_signal():
    # distance 1.3 from the obstacle centre
    x = np.array([2.5 + 1.3, 2.0])
    traj = Trajectory(dt=0.05, states=np.tile(x, (11, 1)))
    phi = Always(0.0, math.inf, Pred(AVOID))
    assert robustness(phi, traj, 0.0) == pytest.approx(0.1, abs=1e-12)


def test_robustness_defaults_to_trajectory_start():
    traj = Trajectory(dt=0.1, states=[[0.0, 0.0], [1.0, 3.5]])
    phi = Eventually(0, 1, Pred(GOAL))
    assert robustness(phi, traj) == robustness(phi, traj, 0.0) == pytest.approx(0.2)


def test_window_outside_trajectory():
    traj = Trajectory(dt=0.1, states=np.zeros((11, 2)))
    with pytest.raises(WindowError, match="window outside trajectory"):
        robustness(Eventually(2.0, 3.0, Pred(GOAL)), traj, 0.0)
    with pytest.raises(WindowError):
        robustness_batch(Eventually(2.0, 3.0, Pred(GOAL)), traj.states[None], 0.1)


def test_off_grid_time():
    traj = Trajectory(dt=0.1, states=np.zeros((11, 2)))
    with pytest.raises(ValueError, match="grid"):
        robustness(Pred(GOAL), traj, 5.0)
    with pytest.raises(ValueError, match="grid"):
        robustness(Pred(GOAL), traj, -0.2)


def test_until_hand_case():
    p = linear_predicate("p", [1.0], 0.0)   # x
    q = linear_predicate("q", [-1.0], 0.0)  # -x
    traj = Trajectory(dt=1.0, states=[[3.0], [2.0], [-1.0], [-4.0]])
    # t1=1: min(q=-2, min(3,2)) = -2; t1=2: min(1, min(3,2,-1)) = -1
    phi = Until(1, 2, Pred(p), Pred(q))
    assert robustness(phi, traj, 0.0) == -1.0


def test_trajectory_shape_invariants():
    with pytest.raises(ValueError):
        Trajectory(dt=0.1, states=np.zeros((4, 2)), inputs=np.zeros((4, 2)))
    with pytest.raises(ValueError):
        Trajectory(dt=0.0, states=np.zeros((4, 2)))
    traj = Trajectory(dt=0.1, states=np.zeros((4, 2)), inputs=np.zeros((3, 1)))
    assert traj.steps == 3 and traj.duration == pytest.approx(0.3)


# --- oracle equivalence and properties -------------------------------------

def _compare(formula, traj):
    expected = materialize(formula, traj.states, traj.dt)[0]
    if expected is None:
        with pytest.raises(WindowError):
            robustness(formula, traj, 0.0)
        return "undefined"
    assert robustness(formula, traj, 0.0) == expected
    batch = robustness_signal(formula, traj.states[None], traj.dt)[0, 0]
    assert batch == expected
    return "defined"


def test_recursive_and_batch_match_brute_force():
    rng = np.random.default_rng(2024)
    outcomes = [_compare(*random_case(rng)) for _ in range(300)]
    assert outcomes.count("defined") > 150


def test_signal_matches_brute_force_at_every_point():
    rng = np.random.default_rng(7)
    for _ in range(100):
        formula, traj = random_case(rng)
        expected = materialize(formula, traj.states, traj.dt)
        got = robustness_signal(formula, traj.states, traj.dt)
        for e, g in zip(expected, got):
            if e is None:
                assert np.isnan(g)
            else:
                assert g == e


def test_sign_soundness():
    rng = np.random.default_rng(99)
    checked = 0
    for _ in range(300):
        formula, traj = random_case(rng)
        try:
            rho = robustness(formula, traj, 0.0)
        except WindowError:
            continue
        if rho > 0:
            assert satisfied(formula, traj, 0.0)
            checked += 1
        elif rho < 0:
            assert not satisfied(formula, traj, 0.0)
    assert checked > 30


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_negation_duality(seed):
    formula, traj = random_case(np.random.default_rng(seed))
    sig = robustness_signal(formula, traj.states, traj.dt)
    neg = robustness_signal(Not(formula), traj.states, traj.dt)
    np.testing.assert_array_equal(np.isnan(sig), np.isnan(neg))
    ok = ~np.isnan(sig)
    np.testing.assert_array_equal(neg[ok], -sig[ok])


# --- smooth robustness -------------------------------------------------------

def test_smooth_single_predicate_is_exact(rng):
    x = rng.normal(size=2)
    v, g = smooth_robustness(Pred(GOAL), x)
    v0, g0 = GOAL.value_and_grad(x)
    assert v == v0
    np.testing.assert_array_equal(g, g0)


def test_smooth_and_of_zeros():
    zero = linear_predicate("z", [0.0, 0.0], 0.0)
    v, _ = smooth_robustness(And((Pred(zero), Pred(zero))), np.zeros(2))
    assert v == pytest.approx(-math.log(2), abs=1e-15)


def test_smooth_and_consensus_distance_pair():
    dmax = PairDistanceMax("dmax", 6, (0, 1), (2, 3), 1.1)
    dmin = PairDistanceMin("dmin", 6, (0, 1), (2, 3), 0.9)
    x = np.array([3.0, 0.8, 2.0, 0.8, 1.2, 0.7])
    v, _ = smooth_robustness(And((Pred(dmax), Pred(dmin))), x)
    # -ln(e^{-0.1} + e^{-0.1})
    assert v == pytest.approx(-math.log(2 * math.exp(-0.1)), abs=1e-12)
    assert v == pytest.approx(-0.5931, abs=5e-5)


def test_smooth_rejects_temporal():
    with pytest.raises(FragmentError, match="non-temporal fragment required"):
        smooth_robustness(Eventually(0, 1, Pred(GOAL)), np.zeros(2))
    with pytest.raises(FragmentError):
        smooth_robustness(And((Pred(GOAL), Always(0, 1, Pred(AVOID)))), np.zeros(2))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=7), st.floats(-3, 3), st.floats(-3, 3))
def test_smooth_under_approximation(offsets, x0, x1):
    preds = [linear_predicate(f"p{i}", [1.0, -0.5], o) for i, o in enumerate(offsets)]
    x = np.array([x0, x1])
    v, _ = smooth_robustness(And(tuple(Pred(p) for p in preds)), x)
    exact = min(float(p.value(x)) for p in preds)
    assert v <= exact + 1e-12
    assert exact - v <= math.log(len(preds)) + 1e-12


def test_smooth_is_batched(rng):
    phi = And((Pred(GOAL), Pred(AVOID), Not(Pred(GOAL))))
    X = rng.normal(size=(5, 4, 2))
    v, g = smooth_robustness(phi, X)
    assert v.shape == (5, 4) and g.shape == (5, 4, 2)
    v1, g1 = smooth_robustness(phi, X[2, 3])
    assert v[2, 3] == pytest.approx(v1)
    np.testing.assert_allclose(g[2, 3], g1)


PREDICATE_SETS = {
    "nav": [GOAL, AVOID],
    "consensus": [
        BallInside("reach1", 6, (0, 1), (2.0, 4.2), 0.1),
        PairDistanceMax("dmax", 6, (0, 1), (2, 3), 1.1),
        PairDistanceMin("dmin", 6, (0, 1), (2, 3), 0.9),
        BallOutside("avoid2", 6, (2, 3), (2.5, 2.5), 1.2),
        MidpointBall("follow", 6, (0, 1), (2, 3), (4, 5), 0.1),
    ],
}


@pytest.mark.parametrize("name", sorted(PREDICATE_SETS))
def test_predicate_gradients_match_finite_differences(name, rng):
    for p in PREDICATE_SETS[name]:
        for _ in range(20):
            x = rng.uniform(-1, 5, size=p.dim)
            g = p.gradient(x)
            fd = finite_difference_grad(lambda z: float(p.value(z)), x)
            np.testing.assert_allclose(g, fd, rtol=1e-4, atol=1e-8)


# --- parser --------------------------------------------------------------------

def test_parse_task_formula():
    f = parse_formula("F[0,10] goal & G[0,inf] avoid", TABLE)
    assert f == And((Eventually(0, 10, Pred(GOAL)), Always(0, math.inf, Pred(AVOID))))


def test_parse_nested_reach_and_stay():
    reach1 = BallInside("reach1", 6, (0, 1), (2.0, 4.2), 0.1)
    f = parse_formula("F[0,7] G[0,inf] reach1", {"reach1": reach1})
    assert f == Eventually(0, 7, Always(0, math.inf, Pred(reach1)))


def test_parse_rejects_reversed_interval():
    with pytest.raises(StlSyntaxError, match="exceeds") as info:
        parse_formula("G[5,3] goal", TABLE)
    assert info.value.position == 1


@pytest.mark.parametrize("text, pos", [
    ("F[0,10] goal &", 14),
    ("F[0 10] goal", 4),
    ("goal avoid", 5),
    ("(goal & avoid", 13),
    ("goal $ avoid", 5),
])
def test_parse_syntax_errors_carry_position(text, pos):
    with pytest.raises(StlSyntaxError) as info:
        parse_formula(text, TABLE)
    assert info.value.position == pos


def test_parse_unknown_predicate():
    with pytest.raises(StlSyntaxError, match="unknown predicate 'wall'"):
        parse_formula("G[0,inf] wall", TABLE)


def test_parse_precedence_and_until():
    f = parse_formula("!goal & avoid U[0,2] goal & (goal & avoid)", TABLE)
    assert f == And((Not(Pred(GOAL)), Until(0, 2, Pred(AVOID), Pred(GOAL)),
                     And((Pred(GOAL), Pred(AVOID)))))


def test_printer_round_trip_random():
    rng = np.random.default_rng(5)
    for _ in range(200):
        formula, _ = random_case(rng)
        table = {p.label: p for p in formula.predicates()}
        assert parse_formula(to_text(formula), table) == formula


def test_printer_output():
    f = parse_formula("F[0,10] goal & G[0,inf] avoid", TABLE)
    assert to_text(f) == "F[0,10] goal & G[0,inf] avoid"
    assert str(Eventually(0.05, 0.1, Not(Pred(GOAL)))) == "F[0.05,0.1] !goal"
