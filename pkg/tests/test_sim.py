import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.linalg import expm

from stlpi2.scenarios import consensus_drift
from stlpi2.sim import (
    ConstantInputMatrix, LinearDrift, LinearFeedback, Policy, SimulationError, SystemModel,
    ZeroBase, ZeroDrift, feedforward, rollout, saturate, simulate, step_count,
)


def integrator(n=2, sigma=None, bounds=()):
    return SystemModel(n, n, ZeroDrift(n), ConstantInputMatrix(np.eye(n)), sigma, bounds)


def test_zero_policy_stays_put():
    model = integrator()
    traj = simulate(model, Policy(ZeroBase(2), np.zeros((20, 2))), [3.0, 0.3], 1.0, 0.05)
    assert np.array_equal(traj.states, np.tile([3.0, 0.3], (21, 1)))
    assert traj.inputs.shape == (20, 2)


def test_constant_unit_input_displacement():
    model = integrator()
    theta = np.zeros((20, 2))
    theta[0] = 1.0  # k_t = 1 for all t
    traj = simulate(model, Policy(ZeroBase(2), theta), [0.0, 0.0], 1.0, 0.05)
    assert np.allclose(traj.states[-1], [1.0, 1.0], atol=1e-12, rtol=0)
    assert np.array_equal(traj.inputs, np.ones((20, 2)))


def test_feedforward_is_running_sum():
    theta = np.arange(12.0).reshape(6, 2)
    k = feedforward(theta)
    assert np.array_equal(k[3], theta[:4].sum(axis=0))
    assert feedforward(np.ones((4, 5, 2))).shape == (4, 5, 2)


def _laplacian_k3():
    return np.array([[2.0, -1, -1], [-1, 2, -1], [-1, -1, 2]])


def test_consensus_matches_matrix_exponential():
    A = np.array(consensus_drift(_laplacian_k3()))
    assert np.allclose(A, -0.1 * np.kron(_laplacian_k3(), np.eye(2)))
    model = SystemModel(6, 6, LinearDrift(A), ConstantInputMatrix(np.eye(6)))
    x0 = np.array([3.0, 0.8, 2.0, 0.8, 1.2, 0.7])
    dt = 0.01
    traj = simulate(model, Policy(ZeroBase(6), np.zeros((1000, 6))), x0, 10.0, dt)
    exact = expm(A * 10.0) @ x0
    assert np.max(np.abs(traj.states[-1] - exact)) < 1e-3
    pos = traj.states.reshape(-1, 3, 2)
    for a, b in [(0, 1), (0, 2), (1, 2)]:
        d = np.linalg.norm(pos[:, a] - pos[:, b], axis=-1)
        assert np.all(np.diff(d) < 0)


def test_saturate_examples():
    one = (((0, 1), 1.0),)
    assert np.array_equal(saturate([0.3, 0.4], one), [0.3, 0.4])
    assert np.allclose(saturate([3.0, 4.0], one), [0.6, 0.8], atol=1e-15)
    groups = (((0, 1), 1.0), ((2, 3), 1.0), ((4, 5), 1.0))
    u = np.array([2.0, 0.0, 0.1, 0.2, -0.3, 0.5])
    assert np.array_equal(saturate(u, groups), [1.0, 0.0, 0.1, 0.2, -0.3, 0.5])
    assert np.array_equal(saturate(u, ()), u)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (3, 6), elements=st.floats(-1e3, 1e3)))
def test_saturate_idempotent(u):
    groups = (((0, 1), 1.0), ((2, 3), 0.5), ((5,), 2.0))
    once = saturate(u, groups)
    assert np.allclose(saturate(once, groups), once, rtol=1e-15, atol=0)
    assert np.all(np.linalg.norm(once[:, [0, 1]], axis=-1) <= 1.0 + 1e-15)
    assert np.array_equal(once[:, 4], u[:, 4])


def test_recorded_inputs_are_saturated():
    model = integrator(bounds=(((0, 1), 1.0),))
    theta = np.zeros((10, 2))
    theta[0] = [3.0, 4.0]
    traj = simulate(model, Policy(ZeroBase(2), theta), [0.0, 0.0], 0.5, 0.05)
    assert np.allclose(traj.inputs, [0.6, 0.8])
    assert np.allclose(traj.states[-1], [0.3, 0.4])


def test_noise_increment_covariance():
    sigma = np.array([[0.2, 0.05], [0.05, 0.1]])
    model = SystemModel(2, 2, ZeroDrift(2), ConstantInputMatrix(np.zeros((2, 2))), sigma)
    dt = 0.05
    L = 100_000
    traj = simulate(model, Policy(ZeroBase(2), np.zeros((L, 2))), [0.0, 0.0], L * dt, dt, seed=7)
    inc = np.diff(traj.states, axis=0)
    cov = np.cov(inc.T)
    assert np.all(np.abs(cov - dt * sigma) <= 0.05 * np.abs(dt * sigma))


def test_rate_noise_increment_covariance():
    sigma = np.array([[0.2, 0.05], [0.05, 0.1]])
    model = SystemModel(2, 2, ZeroDrift(2), ConstantInputMatrix(np.zeros((2, 2))), sigma, noise="rate")
    dt = 0.05
    L = 100_000
    traj = simulate(model, Policy(ZeroBase(2), np.zeros((L, 2))), [0.0, 0.0], L * dt, dt, seed=7)
    cov = np.cov(np.diff(traj.states, axis=0).T)
    assert np.all(np.abs(cov - dt**2 * sigma) <= 0.05 * np.abs(dt**2 * sigma))


def test_unknown_noise_model_rejected():
    with pytest.raises(ValueError, match="noise"):
        SystemModel(1, 1, ZeroDrift(1), ConstantInputMatrix(np.eye(1)), np.eye(1), noise="ito")


def test_determinism_and_fresh_entropy():
    model = integrator(sigma=0.2 * np.eye(2))
    pol = Policy(ZeroBase(2), np.zeros((200, 2)))
    a = simulate(model, pol, [0, 0], 10.0, 0.05, seed=3)
    b = simulate(model, pol, [0, 0], 10.0, 0.05, seed=3)
    c = simulate(model, pol, [0, 0], 10.0, 0.05, seed=None)
    assert np.array_equal(a.states, b.states)
    assert not np.array_equal(a.states, c.states)


def test_divergence_reported():
    A = np.array([[1e3]])
    model = SystemModel(1, 1, LinearDrift(A), ConstantInputMatrix(np.eye(1)))
    with pytest.raises(SimulationError, match="diverged at step"):
        simulate(model, Policy(ZeroBase(1), np.zeros((2000, 1))), [1.0], 20.0, 0.01)
    res = rollout(model, ZeroBase(1), np.zeros((2, 2000, 1)), [1.0], 0.01)
    assert np.all(res.diverged_at > 0) and not res.ok.any()


def test_step_count_checks_grid():
    assert step_count(10.0, 0.05) == 200
    with pytest.raises(ValueError, match="integer multiple"):
        step_count(1.0, 0.3)
    model = integrator()
    with pytest.raises(ValueError, match="policy has"):
        simulate(model, Policy(ZeroBase(2), np.zeros((5, 2))), [0, 0], 1.0, 0.05)


def test_linear_feedback_schedule():
    K = np.stack([np.eye(2), 2 * np.eye(2)])
    fb = LinearFeedback(K, dt=0.1)
    x = np.array([[1.0, 2.0]])
    assert np.array_equal(fb(x, 0.0), [[-1.0, -2.0]])
    assert np.array_equal(fb(x, 0.1), [[-2.0, -4.0]])
    assert np.array_equal(LinearFeedback(np.eye(2))(x, 5.0), [[-1.0, -2.0]])
    with pytest.raises(ValueError):
        LinearFeedback(K)


def test_model_validation():
    with pytest.raises(ValueError, match="symmetric"):
        integrator(sigma=np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(ValueError, match="semidefinite"):
        integrator(sigma=-np.eye(2))
    with pytest.raises(ValueError, match="overlap"):
        integrator(bounds=(((0, 1), 1.0), ((1,), 1.0)))
    with pytest.raises(ValueError, match="out of range"):
        integrator(bounds=(((0, 2), 1.0),))
    with pytest.raises(ValueError, match="positive"):
        integrator(bounds=(((0,), 0.0),))


def test_policy_sees_only_state_time_and_input_matrix():
    seen = []

    def base(x, t, g_x):
        seen.append((x.shape, t, g_x.shape))
        return np.zeros(x.shape[:-1] + (2,))

    def drift(x):
        return -x

    model = SystemModel(2, 2, drift, ConstantInputMatrix(np.eye(2)))
    rollout(model, base, np.zeros((3, 4, 2)), [1.0, 1.0], 0.1)
    assert [s[1] for s in seen] == pytest.approx([0.0, 0.1, 0.2, 0.3])
    assert all(s[0] == (3, 2) and s[2] == (3, 2, 2) for s in seen)
