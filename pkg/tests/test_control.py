import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from rmoqpso.control import (
    GainMatrix,
    StateSpaceModel,
    WeightingConfig,
    compute_gain,
    lqr,
    quadratic_index,
    rk4_step_matrix,
    simulate_closed_loop,
    solve_care,
    solve_lyapunov,
    spectral_abscissa,
    stability_check,
)
from rmoqpso.errors import DimensionMismatch, InvalidWeights, NonControllable

from conftest import random_controllable

SQ3 = math.sqrt(3.0)


def residual(model, w, P):
    Rinv = np.diag(1.0 / np.asarray(w.r_diag))
    return P @ model.A + model.A.T @ P + w.Q - P @ model.B @ Rinv @ model.B.T @ P


# ---------------------------------------------------------------- model types


def test_model_defaults_and_labels():
    m = StateSpaceModel([[0.0, 1.0], [0.0, 0.0]], [0.0, 1.0])
    assert m.B.shape == (2, 1)
    assert np.array_equal(m.C, np.eye(2)) and np.array_equal(m.D, np.zeros((2, 1)))
    assert m.state_names == ("x1", "x2") and m.input_names == ("u1",)


@pytest.mark.parametrize(
    "A,B",
    [([[1.0, 2.0]], [[1.0]]), ([[1.0]], [[1.0], [2.0]]), ([[0.0, 1.0], [0.0, 0.0]], np.zeros((2, 0)))],
)
def test_model_dimension_checks(A, B):
    with pytest.raises(DimensionMismatch):
        StateSpaceModel(A, B)


def test_model_round_trip(double_integrator):
    assert StateSpaceModel.from_dict(double_integrator.to_dict()) == double_integrator


def test_controllability(double_integrator):
    assert double_integrator.is_controllable()
    assert not StateSpaceModel(np.zeros((2, 2)), np.zeros((2, 1))).is_controllable()


def test_weights_validation():
    m = StateSpaceModel([[0.0]], [[1.0]])
    with pytest.raises(InvalidWeights):
        WeightingConfig([-1.0], [1.0]).validate(m)
    with pytest.raises(InvalidWeights):
        WeightingConfig([1.0], [0.0]).validate(m)
    with pytest.raises(DimensionMismatch):
        WeightingConfig([1.0, 1.0], [1.0]).validate(m)


# ---------------------------------------------------------------- Riccati


def test_scalar_care_integrator():
    P = solve_care(StateSpaceModel([[0.0]], [[1.0]]), WeightingConfig([1.0], [1.0]))
    assert P[0, 0] == pytest.approx(1.0, abs=1e-10)


def test_scalar_care_stable_plant_zero_weight():
    P = solve_care(StateSpaceModel([[-1.0]], [[1.0]]), WeightingConfig([0.0], [1.0]))
    assert P[0, 0] == pytest.approx(0.0, abs=1e-10)


def test_double_integrator_care(double_integrator):
    w = WeightingConfig([1.0, 1.0], [1.0])
    P = solve_care(double_integrator, w)
    expected = np.array([[SQ3, 1.0], [1.0, SQ3]])
    # the candidate itself zeroes the residual, independent of the solver
    assert np.abs(residual(double_integrator, w, expected)).max() < 1e-12
    assert np.allclose(P, expected, atol=1e-9)
    K = compute_gain(P, double_integrator, w).K
    assert np.allclose(K, [[1.0, SQ3]], atol=1e-9)


def test_care_rejects_uncontrollable():
    with pytest.raises(NonControllable):
        solve_care(StateSpaceModel(np.eye(2), [[1.0], [0.0]]), WeightingConfig([1.0, 1.0], [1.0]))


def test_care_matches_scipy_on_random_systems():
    rng = np.random.default_rng(11)
    for _ in range(25):
        model = random_controllable(rng)
        w = WeightingConfig(rng.uniform(0.1, 10, model.n), rng.uniform(0.1, 10, model.m))
        P = solve_care(model, w)
        ref = scipy.linalg.solve_continuous_are(model.A, model.B, w.Q, w.R)
        assert np.allclose(P, ref, rtol=1e-6, atol=1e-8 * max(1.0, np.linalg.norm(ref)))


def test_lyapunov_against_scipy():
    rng = np.random.default_rng(3)
    for n in (1, 3, 6):
        Ac = rng.normal(size=(n, n)) - 4 * n * np.eye(n)
        M = rng.normal(size=(n, n))
        M = M + M.T
        X = solve_lyapunov(Ac, M)
        assert np.allclose(X, scipy.linalg.solve_continuous_lyapunov(Ac.T, -M), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100.0))
def test_gain_is_scale_invariant(seed, c):
    rng = np.random.default_rng(seed)
    model = random_controllable(rng, n_max=4, m_max=2)
    w = WeightingConfig(rng.uniform(0.1, 5, model.n), rng.uniform(0.1, 5, model.m))
    ws = WeightingConfig(np.array(w.q_diag) * c, np.array(w.r_diag) * c)
    K1 = lqr(model, w)[1].K
    K2 = lqr(model, ws)[1].K
    assert np.allclose(K1, K2, rtol=1e-6, atol=1e-8 * max(1.0, np.abs(K1).max()))


# ---------------------------------------------------------------- gain and stability


def test_compute_gain_examples():
    m = StateSpaceModel([[0.0]], [[1.0]])
    assert compute_gain(np.array([[1.0]]), m, WeightingConfig([1.0], [1.0])).K[0, 0] == 1.0
    assert compute_gain(np.array([[4.0]]), m, WeightingConfig([1.0], [2.0])).K[0, 0] == 2.0
    with pytest.raises(DimensionMismatch):
        compute_gain(np.eye(2), m, WeightingConfig([1.0], [1.0]))


def test_stability_examples(double_integrator):
    assert stability_check(StateSpaceModel([[-1.0]], [[0.0]]), [[0.0]]) == pytest.approx(-1.0)
    assert stability_check(StateSpaceModel([[0.0]], [[1.0]]), [[1.0]]) == pytest.approx(-1.0)
    assert stability_check(double_integrator, [[1.0, SQ3]]) < 0


# ---------------------------------------------------------------- simulation


def naive_rk4(Ac, x0, dt, steps):
    """Stage-by-stage RK4, the textbook loop."""
    f = lambda x: Ac @ x
    xs = [np.asarray(x0, dtype=float)]
    for _ in range(steps):
        x = xs[-1]
        k1 = f(x)
        k2 = f(x + dt / 2 * k1)
        k3 = f(x + dt / 2 * k2)
        k4 = f(x + dt * k3)
        xs.append(x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
    return np.array(xs)


def test_simulation_matches_textbook_rk4():
    rng = np.random.default_rng(5)
    model = random_controllable(rng, n_max=5)
    _, gain = lqr(model, WeightingConfig(np.ones(model.n), np.ones(model.m)))
    x0 = rng.normal(size=model.n)
    traj = simulate_closed_loop(model, gain, x0, 2.0, 0.01)
    ref = naive_rk4(model.A - model.B @ gain.K, x0, 0.01, 200)
    assert traj.states.shape == ref.shape
    assert np.allclose(traj.states, ref, rtol=1e-10, atol=1e-12)


def test_step_matrix_is_one_rk4_step():
    Ac = np.array([[0.0, 1.0], [-2.0, -0.3]])
    x = np.array([0.7, -1.1])
    assert np.allclose(rk4_step_matrix(Ac, 0.05) @ x, naive_rk4(Ac, x, 0.05, 1)[1], atol=1e-15)


def test_first_order_decay():
    traj = simulate_closed_loop(StateSpaceModel([[0.0]], [[1.0]]), [[1.0]], [1.0], 1.0, 1e-3)
    assert traj.states[-1, 0] == pytest.approx(math.exp(-1.0), abs=1e-6)
    assert np.allclose(np.diff(traj.times), 1e-3)
    assert np.allclose(traj.inputs, -traj.states)


def test_zero_dynamics_constant():
    model = StateSpaceModel([[0.0]], [[3.0]])
    traj = simulate_closed_loop(model, GainMatrix(np.zeros((1, 1))), [2.5], 1.0, 0.1)
    assert np.all(traj.states == 2.5) and np.all(traj.inputs == 0)


def test_rk4_fourth_order():
    model = StateSpaceModel([[0.0, 1.0], [-4.0, -0.5]], [[0.0], [1.0]])
    K = np.zeros((1, 2))
    exact = scipy.linalg.expm(2.0 * (model.A)) @ np.array([1.0, 0.0])
    e1 = np.abs(simulate_closed_loop(model, K, [1.0, 0.0], 2.0, 0.02).states[-1] - exact).max()
    e2 = np.abs(simulate_closed_loop(model, K, [1.0, 0.0], 2.0, 0.01).states[-1] - exact).max()
    assert 12 < e1 / e2 < 20


def test_blowup_is_flagged_and_truncated():
    model = StateSpaceModel([[5.0]], [[1.0]])
    traj = simulate_closed_loop(model, [[0.0]], [1.0], 10.0, 0.01)
    assert traj.blown_up
    assert len(traj.times) == len(traj.states) == len(traj.inputs) < 1001
    assert np.all(np.abs(traj.states) <= 1e12)
    assert quadratic_index(traj, WeightingConfig([1.0], [1.0])) == math.inf


def test_simulation_argument_checks(double_integrator):
    with pytest.raises(ValueError):
        simulate_closed_loop(double_integrator, [[1.0, 1.0]], [1.0, 0.0], 1.0, 0.0)
    with pytest.raises(DimensionMismatch):
        simulate_closed_loop(double_integrator, [[1.0]], [1.0, 0.0], 1.0, 0.1)
    with pytest.raises(DimensionMismatch):
        simulate_closed_loop(double_integrator, [[1.0, 1.0]], [1.0], 1.0, 0.1)


# ---------------------------------------------------------------- performance index


def test_index_zero_state(double_integrator):
    traj = simulate_closed_loop(double_integrator, [[1.0, SQ3]], [0.0, 0.0], 1.0, 0.01)
    assert quadratic_index(traj, WeightingConfig([1.0, 1.0], [1.0])) == 0.0


def test_index_scalar_cost_identity():
    model = StateSpaceModel([[0.0]], [[1.0]])
    w = WeightingConfig([1.0], [1.0])
    traj = simulate_closed_loop(model, [[1.0]], [1.0], 20.0, 1e-3)
    assert quadratic_index(traj, w) == pytest.approx(1.0, abs=1e-3)


def test_index_double_integrator_cost_identity(double_integrator):
    w = WeightingConfig([1.0, 1.0], [1.0])
    P, gain = lqr(double_integrator, w)
    traj = simulate_closed_loop(double_integrator, gain, [1.0, 0.0], 40.0, 0.01)
    assert quadratic_index(traj, w) == pytest.approx(SQ3, rel=0.01)


def test_pendulum_closed_loop_decays():
    from rmoqpso.benchmarks import pendulum_model

    b = pendulum_model()
    w = WeightingConfig([1.0, 1.0, 10.0, 1.0], [1.0])
    _, gain = lqr(b.model, w)
    assert spectral_abscissa(b.model.A - b.model.B @ gain.K) < 0
    traj = simulate_closed_loop(b.model, gain, b.x0, 30.0, 0.005)
    assert np.abs(traj.states[-1]).max() < 1e-3 * np.abs(b.x0).max()
