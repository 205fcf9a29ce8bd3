"""Simulators, impulse/Toeplitz maps, and initial-state estimation."""

import numpy as np
import pytest
from conftest import minimal_random_ss, rand_traj

from lpvdd import (
    CoeffMatrix,
    DimensionMismatch,
    InconsistentTrajectory,
    LpvSsModel,
    RankDeficientObservability,
    Trajectory,
    WindowOutOfRange,
    estimate_initial_state,
    example_verhoek,
    impulse_coeff,
    obsv_eval,
    obsv_matrix,
    propagate_state,
    random_affine_ss,
    response_map,
    simulate_io,
    simulate_ss,
    toeplitz,
    toeplitz_eval,
    vec,
)


def _scalar_lti(a, b, c, d):
    return LpvSsModel(
        A=CoeffMatrix.constant([[a]], 1),
        B=CoeffMatrix.constant([[b]], 1),
        C=CoeffMatrix.constant([[c]], 1),
        D=CoeffMatrix.constant([[d]], 1),
    )


def test_zero_state_zero_input_stays_zero():
    rng = np.random.default_rng(0)
    m = random_affine_ss(rng, 2, 1, 1, 2)
    u = Trajectory(1, np.zeros((6, 1)))
    p = rand_traj(rng, 2, 6)
    sim = simulate_ss(m, np.zeros(2), u, p)
    assert not sim.y.samples.any()
    assert not sim.x.samples.any()


def test_geometric_decay():
    m = _scalar_lti(0.5, 1.0, 1.0, 0.0)
    u = Trajectory(1, np.zeros((3, 1)))
    p = rand_traj(np.random.default_rng(1), 1, 3)
    sim = simulate_ss(m, [1.0], u, p)
    assert np.allclose(sim.y.samples.ravel(), [1.0, 0.5, 0.25], atol=0)
    assert sim.x.length == 4 and sim.y.length == 3
    assert sim.domain == (1, 3)


def test_superposition_in_input():
    rng = np.random.default_rng(2)
    m = random_affine_ss(rng, 3, 2, 2, 1)
    p = rand_traj(rng, 1, 8)
    u1, u2 = rand_traj(rng, 2, 8), rand_traj(rng, 2, 8)
    a, b = 1.7, -0.4
    mix = Trajectory(1, a * u1.samples + b * u2.samples)
    y_mix = simulate_ss(m, np.zeros(3), mix, p).y.samples
    y_sep = (
        a * simulate_ss(m, np.zeros(3), u1, p).y.samples
        + b * simulate_ss(m, np.zeros(3), u2, p).y.samples
    )
    assert np.max(np.abs(y_mix - y_sep)) < 1e-12


def test_simulate_ss_window_and_dim_errors():
    rng = np.random.default_rng(3)
    m = random_affine_ss(rng, 2, 1, 1, 2)
    u = rand_traj(rng, 1, 5)
    with pytest.raises(DimensionMismatch):
        simulate_ss(m, np.zeros(3), u, rand_traj(rng, 2, 5))
    with pytest.raises(DimensionMismatch):
        simulate_ss(m, np.zeros(2), u, rand_traj(rng, 1, 5))
    # model whose output map reads one step ahead: p must cover t_end + 1
    m2 = LpvSsModel(A=m.A, B=m.B, C=m.C.shift(1), D=m.D)
    with pytest.raises(WindowOutOfRange):
        simulate_ss(m2, np.zeros(2), u, rand_traj(rng, 2, 5))


def test_simulate_io_identity_recursion_is_zero():
    m = example_verhoek()
    zero_model_y = simulate_io(
        m,
        Trajectory(1, np.zeros((8, 1))),
        Trajectory(1, np.zeros((8, 2))),
        y_init=np.zeros((2, 1)),
    )
    assert not zero_model_y.samples.any()


def test_simulate_io_frozen_scheduling_matches_lti_recursion():
    # with p identically zero only the constant parts act
    m = example_verhoek()
    u = Trajectory.from_values([[1.0], [0.0], [0.0], [0.0], [0.0]])
    p = Trajectory(1, np.zeros((5, 2)))
    y = simulate_io(m, u, p, y_init=np.zeros((2, 1))).samples.ravel()
    # hand recursion: y(k) = -1*y(k-1) - 0.5*y(k-2) + 0.5*u(k-1) + 0.2*u(k-2)
    yk = [0.0, 0.0]
    uk = [1.0, 0.0, 0.0, 0.0, 0.0]
    for k in range(2, 5):
        yk.append(-1.0 * yk[k - 1] - 0.5 * yk[k - 2] + 0.5 * uk[k - 1] + 0.2 * uk[k - 2])
    assert np.allclose(y, yk, atol=1e-15)


def test_simulate_io_agrees_with_kernel_residual():
    from lpvdd import io_to_kernel

    m = example_verhoek()
    rng = np.random.default_rng(4)
    u, p = rand_traj(rng, 1, 15), rand_traj(rng, 2, 15)
    y = simulate_io(m, u, p, y_init=rng.normal(size=(2, 1)))
    w = Trajectory(1, np.hstack([u.samples, y.samples]))
    assert np.max(np.abs(io_to_kernel(m).residual(w, p))) <= 1e-10


def test_impulse_coeff_base_cases():
    rng = np.random.default_rng(5)
    m = random_affine_ss(rng, 2, 1, 1, 2)
    assert impulse_coeff(m, -1).is_zero
    assert impulse_coeff(m, 0) == m.D


def test_impulse_coeff_constant_model_markov_parameters():
    rng = np.random.default_rng(6)
    A, B = rng.normal(size=(3, 3)), rng.normal(size=(3, 2))
    C, D = rng.normal(size=(1, 3)), rng.normal(size=(1, 2))
    m = LpvSsModel(
        A=CoeffMatrix.constant(A, 1),
        B=CoeffMatrix.constant(B, 1),
        C=CoeffMatrix.constant(C, 1),
        D=CoeffMatrix.constant(D, 1),
    )
    p = rand_traj(rng, 1, 1)
    for n in range(4):
        markov = D if n == 0 else C @ np.linalg.matrix_power(A, n - 1) @ B
        assert np.allclose(impulse_coeff(m, n).eval(p, 1), markov, atol=1e-12)


def test_impulse_coeff_matches_impulse_simulation():
    rng = np.random.default_rng(7)
    m = random_affine_ss(rng, 2, 2, 1, 2)
    n = 2
    h2 = impulse_coeff(m, n)
    k = 1
    p = rand_traj(rng, 2, 6, t_start=0)
    for i in range(m.n_u):
        samples = np.zeros((n + 1, m.n_u))
        samples[0, i] = 1.0
        u = Trajectory(k, samples)
        sim = simulate_ss(m, np.zeros(2), u, p)
        assert np.allclose(h2.eval(p, k)[:, i], sim.y.value(k + n), atol=1e-12)


def test_toeplitz_single_block_is_feedthrough():
    rng = np.random.default_rng(8)
    m = random_affine_ss(rng, 2, 1, 1, 1)
    assert toeplitz(m, 1) == m.D


def test_toeplitz_zero_state_response_oracle():
    rng = np.random.default_rng(9)
    for _ in range(5):
        m = random_affine_ss(rng, 2, 1, 1, 2)
        T = 4
        Tm = toeplitz(m, T)
        u = rand_traj(rng, 1, T)
        p = rand_traj(rng, 2, T + T, t_start=0)
        y_sim = simulate_ss(m, np.zeros(2), u, p).y
        assert np.max(np.abs(Tm.eval(p, 1) @ vec(u) - vec(y_sim))) < 1e-10


def test_toeplitz_eval_matches_symbolic():
    rng = np.random.default_rng(10)
    m = random_affine_ss(rng, 2, 2, 2, 1)
    T = 3
    p = rand_traj(rng, 1, 2 * T, t_start=0)
    sym = toeplitz(m, T).eval(p, 1)
    num = toeplitz_eval(m, T, p, 1)
    assert np.max(np.abs(sym - num)) < 1e-12


def test_obsv_eval_matches_symbolic():
    rng = np.random.default_rng(11)
    m = random_affine_ss(rng, 3, 1, 2, 2)
    p = rand_traj(rng, 2, 8, t_start=0)
    sym = obsv_matrix(m, 4).eval(p, 1)
    num = obsv_eval(m, 4, p, 1)
    assert np.max(np.abs(sym - num)) < 1e-12


def test_response_map_trivial_cases():
    rng = np.random.default_rng(12)
    m = random_affine_ss(rng, 2, 1, 1, 1)
    T = 5
    p = rand_traj(rng, 1, T)
    u0 = Trajectory(1, np.zeros((T, 1)))
    assert not response_map(m, np.zeros(2), u0, p).any()
    # free response equals the observability map applied to the state
    x0 = rng.normal(size=2)
    free = response_map(m, x0, u0, p)
    assert np.allclose(free, obsv_eval(m, T, p, 1) @ x0, atol=1e-14)


def test_response_map_equals_recursive_simulation():
    rng = np.random.default_rng(13)
    for _ in range(100):
        n_x = int(rng.integers(1, 4))
        n_u = int(rng.integers(1, 3))
        n_y = int(rng.integers(1, 3))
        m = random_affine_ss(rng, n_x, n_u, n_y, int(rng.integers(1, 3)))
        T = int(rng.integers(2, 11))
        u = rand_traj(rng, n_u, T)
        p = rand_traj(rng, m.n_p, T)
        x0 = rng.normal(size=n_x)
        diff = response_map(m, x0, u, p) - vec(simulate_ss(m, x0, u, p).y)
        assert np.max(np.abs(diff)) <= 1e-10


def test_estimate_initial_state_recovers_truth():
    rng = np.random.default_rng(14)
    for _ in range(20):
        n_x = int(rng.integers(1, 4))
        m = minimal_random_ss(rng, n_x, 1, 1, 1)
        T_ini = n_x + 1
        u = rand_traj(rng, 1, T_ini)
        p = rand_traj(rng, 1, T_ini)
        x0 = rng.normal(size=n_x)
        sim = simulate_ss(m, x0, u, p)
        est = estimate_initial_state(m, u, p, sim.y)
        assert np.max(np.abs(est.x - x0)) <= 1e-8
        assert est.residual <= 1e-10
        assert est.sigma_min > 0


def test_estimate_initial_state_window_too_short():
    rng = np.random.default_rng(15)
    m = minimal_random_ss(rng, 3, 1, 1, 1)
    u = rand_traj(rng, 1, 2)
    p = rand_traj(rng, 1, 2)
    y = simulate_ss(m, np.zeros(3), u, p).y
    with pytest.raises(RankDeficientObservability):
        estimate_initial_state(m, u, p, y)


def test_estimate_initial_state_detects_perturbation():
    rng = np.random.default_rng(16)
    m = minimal_random_ss(rng, 2, 1, 1, 1)
    T_ini = 3
    u, p = rand_traj(rng, 1, T_ini), rand_traj(rng, 1, T_ini)
    sim = simulate_ss(m, rng.normal(size=2), u, p)
    bad = sim.y.samples.copy()
    bad[1, 0] += 1.0
    with pytest.raises(InconsistentTrajectory):
        estimate_initial_state(m, u, p, Trajectory(1, bad))


def test_estimate_initial_state_invariant_to_consistent_suffix():
    # the estimate from the initial window does not depend on what follows
    rng = np.random.default_rng(17)
    m = minimal_random_ss(rng, 2, 1, 1, 1)
    T_ini, T_tail = 3, 4
    u = rand_traj(rng, 1, T_ini + T_tail)
    p = rand_traj(rng, 1, T_ini + T_tail)
    x0 = rng.normal(size=2)
    sim = simulate_ss(m, x0, u, p)
    est_full_window = estimate_initial_state(
        m, u.restrict(1, T_ini), p.restrict(1, T_ini), sim.y.restrict(1, T_ini)
    )
    assert np.max(np.abs(est_full_window.x - x0)) <= 1e-8


def test_propagate_state_single_step_and_lti_reduction():
    rng = np.random.default_rng(18)
    m = random_affine_ss(rng, 2, 1, 1, 1)
    p = rand_traj(rng, 1, 1)
    u0 = Trajectory(1, np.zeros((1, 1)))
    x1 = rng.normal(size=2)
    assert np.allclose(
        propagate_state(m, x1, u0, p), m.A.eval(p, 1) @ x1, atol=1e-14
    )

    A, B = rng.normal(size=(2, 2)), rng.normal(size=(2, 1))
    lti = LpvSsModel(
        A=CoeffMatrix.constant(A, 1),
        B=CoeffMatrix.constant(B, 1),
        C=CoeffMatrix.constant(np.eye(2), 1),
        D=CoeffMatrix.constant(np.zeros((2, 1)), 1),
    )
    T = 4
    u = rand_traj(rng, 1, T)
    p4 = rand_traj(rng, 1, T)
    expected = sum(
        np.linalg.matrix_power(A, T - k) @ B @ u.value(k) for k in range(1, T + 1)
    )
    assert np.allclose(propagate_state(lti, np.zeros(2), u, p4), expected, atol=1e-12)


def test_propagate_state_matches_simulator_terminal_state():
    rng = np.random.default_rng(19)
    for _ in range(30):
        n_x = int(rng.integers(1, 4))
        m = random_affine_ss(rng, n_x, int(rng.integers(1, 3)), 1, int(rng.integers(1, 3)))
        T = int(rng.integers(1, 7))
        u = rand_traj(rng, m.n_u, T)
        p = rand_traj(rng, m.n_p, T)
        x1 = rng.normal(size=n_x)
        sim = simulate_ss(m, x1, u, p)
        prop = propagate_state(m, x1, u, p)
        assert np.max(np.abs(prop - sim.x.value(T + 1))) <= 1e-12
