import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from teachbench import errors
from teachbench.dmp import (
    DmpConfig,
    DmpModel,
    DofModel,
    basis_activations,
    basis_layout,
    canonical_decay,
    fit_weights_lwr,
    forcing,
    load_model,
    model_to_dict,
    phase_series,
    rollout,
    save_model,
    target_forces,
    train,
)
from teachbench.trajectory import Trajectory, differentiate, resample

ALPHA = math.log(100.0)


def untrained_model(stiffness, x0, goal, tau, n_basis=20):
    config = DmpConfig(stiffness=stiffness, n_basis=n_basis)
    centers, widths = basis_layout(config.alpha, n_basis)
    dofs = tuple(DofModel(weights=np.zeros(n_basis), x0=float(a), goal=float(b))
                 for a, b in zip(np.atleast_1d(x0), np.atleast_1d(goal)))
    return DmpModel(config=config, tau=tau, centers=centers, widths=widths, dofs=dofs)


def minimum_jerk_demo(duration=1.0, n=1001, start=0.0, end=1.0):
    t = np.linspace(0.0, duration, n)
    s = t / duration
    shape = 10 * s**3 - 15 * s**4 + 6 * s**5
    return Trajectory.from_arrays(t, (start + (end - start) * shape).reshape(-1, 1))


def rest_to_rest_demo(dofs=6, duration=2.0, n=2001, seed=3):
    """Sum of <=1 Hz cosines per joint, at rest (zero velocity and
    acceleration) at both ends, with a clear displacement."""
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, duration, n)
    q = np.zeros((n, dofs))
    for j in range(dofs):
        c1 = rng.uniform(0.3, 0.6) * rng.choice([-1.0, 1.0])
        c2 = rng.uniform(-0.25, 0.25)
        q[:, j] = (rng.uniform(-1.0, 1.0)
                   + c1 * (np.cos(np.pi * t / duration)
                           - np.cos(3 * np.pi * t / duration) / 9)
                   + c2 * (np.cos(2 * np.pi * t / duration)
                           - np.cos(4 * np.pi * t / duration) / 4))
    return Trajectory.from_arrays(t, q)


# --- canonical system ---

def test_phase_starts_at_one_exactly():
    assert phase_series(5, ALPHA, 1.0, 1e-3)[0] == 1.0


def test_phase_matches_closed_form():
    s = phase_series(1001, ALPHA, 1.0, 1e-3)[-1]
    assert abs(s - 0.01) < 2e-4


def test_phase_tau_scaling_symmetry():
    # tau=2 integrated to t=1 matches tau=1 integrated to t=0.5; the shared
    # discrete step leaves an O(dt) mismatch
    s_slow = phase_series(1001, ALPHA, 2.0, 1e-3)[-1]
    s_fast = phase_series(501, ALPHA, 1.0, 1e-3)[-1]
    assert s_slow == pytest.approx(s_fast, rel=5e-3)
    # doubling dt together with tau reproduces the identical discrete system
    s_exact = phase_series(501, ALPHA, 2.0, 2e-3)[-1]
    assert s_exact == phase_series(501, ALPHA, 1.0, 1e-3)[-1]


def test_phase_strictly_decreasing_and_positive():
    s = phase_series(5000, ALPHA, 1.0, 1e-3)
    assert np.all(s > 0)
    assert np.all(np.diff(s) < 0)


def test_phase_floor():
    assert canonical_decay(1e-12, ALPHA, 1.0, 1.0) == 1e-12


# --- forcing term ---

def test_forcing_zero_weights():
    centers, widths = basis_layout(ALPHA, 20)
    for s in (1.0, 0.5, 0.01):
        assert forcing(np.zeros(20), centers, widths, s) == 0.0


def test_forcing_constant_weights_is_linear_in_phase():
    centers, widths = basis_layout(ALPHA, 20)
    w = np.full(20, 3.7)
    for s in (1.0, 0.42, 0.05):
        assert forcing(w, centers, widths, s) == pytest.approx(3.7 * s, rel=1e-12)


def test_forcing_two_basis_example():
    centers, widths = basis_layout(ALPHA, 2)
    value = forcing(np.array([2.0, 0.0]), centers, widths, centers[0])
    assert value == pytest.approx(2.0 * centers[0], rel=0.05)


def test_forcing_returns_zero_when_bases_vanish():
    centers = np.array([1.0, 0.9])
    widths = np.array([1e8, 1e8])
    assert forcing(np.array([5.0, 5.0]), centers, widths, 0.01) == 0.0


# --- target force inversion ---

def test_target_forces_static_dof():
    x = np.full(100, 2.0)
    zero = np.zeros(100)
    f, static = target_forces(x, zero, zero, DmpConfig(), 1.0, 2.0, 2.0)
    assert static
    assert np.all(f == 0.0)


def test_target_forces_unforced_response_is_zero():
    # demo = closed-form critically damped response => forcing target ~ 0
    config = DmpConfig(stiffness=25.0)  # D = 10
    tau, x0, goal = 1.0, 0.0, 1.0
    omega = 5.0  # sqrt(K), in the time-scaled coordinate sigma = t / tau
    t = np.arange(0.0, 1.0 + 1e-9, 1e-4)
    sigma = t / tau
    x = goal - (goal - x0) * (1 + omega * sigma) * np.exp(-omega * sigma)
    traj = Trajectory.from_arrays(t, x.reshape(-1, 1))
    vel, acc = differentiate(traj)
    f, static = target_forces(x, vel[:, 0], acc[:, 0], config, tau, goal, x0)
    assert not static
    assert np.max(np.abs(f)) < 1e-3


def test_target_forces_matches_analytic_inversion():
    # analytic x, xd, xdd for a known path: the op must reproduce the formula
    config = DmpConfig(stiffness=64.0)
    tau, x0, goal = 2.0, 0.5, 1.5
    t = np.linspace(0.0, tau, 500)
    x = x0 + (goal - x0) * (t / tau) ** 2
    xd = 2 * (goal - x0) * t / tau**2
    xdd = np.full_like(t, 2 * (goal - x0) / tau**2)
    f, _ = target_forces(x, xd, xdd, config, tau, goal, x0)
    span = goal - x0
    expected = (tau**2 * xdd + config.damping * tau * xd
                - config.stiffness * (goal - x)) / span
    assert np.allclose(f, expected, atol=1e-12)


def test_target_forces_dimension_mismatch():
    with pytest.raises(errors.DimensionMismatch):
        target_forces(np.zeros(5), np.zeros(4), np.zeros(5), DmpConfig(), 1.0, 1.0, 0.0)


# --- weight fitting ---

def test_fit_zero_target_gives_zero_weights():
    centers, widths = basis_layout(ALPHA, 20)
    s = phase_series(500, ALPHA, 1.0, 1e-3)
    w = fit_weights_lwr(np.zeros(500), s, centers, widths, 1e-10)
    assert np.all(w == 0.0)


def test_fit_recovers_known_weights_with_separated_bases():
    # oracle: generate forcing from known weights over well-separated bases
    idx = np.arange(10)
    centers = np.exp(-ALPHA * idx / 9)
    gaps = np.abs(np.diff(centers))
    widths = np.empty(10)
    widths[:-1] = 1.0 / (2.0 * (gaps / 6.0) ** 2)
    widths[-1] = widths[-2]
    s = phase_series(1000, ALPHA, 1.0, 1e-3)
    psi = basis_activations(centers, widths, s)
    for seed in range(3):
        rng = np.random.default_rng(seed)
        w_true = rng.uniform(1.0, 5.0, size=10) * rng.choice([-1.0, 1.0], size=10)
        f = (psi @ w_true) / psi.sum(axis=1) * s
        w_fit = fit_weights_lwr(f, s, centers, widths, 1e-10)
        assert np.max(np.abs(w_fit - w_true) / np.abs(w_true)) < 0.05


def test_fit_single_sample_stays_finite():
    centers, widths = basis_layout(ALPHA, 20)
    w = fit_weights_lwr(np.array([3.0]), np.array([1.0]), centers, widths, 1e-10)
    assert np.all(np.isfinite(w))


def test_fit_empty_demo():
    centers, widths = basis_layout(ALPHA, 20)
    with pytest.raises(errors.EmptyDemo):
        fit_weights_lwr(np.array([]), np.array([]), centers, widths, 1e-10)


# --- training ---

def test_train_six_dof_shapes():
    demo = rest_to_rest_demo()
    model = train(demo, DmpConfig(n_basis=20))
    assert model.dof == 6
    assert model.tau == pytest.approx(2.0)
    assert all(len(d.weights) == 20 for d in model.dofs)
    pos = resample(demo, 1e-3).positions()
    assert np.allclose(model.x0, pos[0])
    assert np.allclose(model.goal, pos[-1])
    # centers strictly decreasing in (0, 1]
    assert model.centers[0] == 1.0
    assert np.all(np.diff(model.centers) < 0)
    assert np.all(model.centers > 0)
    assert np.all(model.widths > 0)


def test_train_constant_demo_all_static():
    t = np.linspace(0, 1, 500)
    demo = Trajectory.from_arrays(t, np.full((500, 3), 1.25))
    model = train(demo)
    assert all(d.static for d in model.dofs)
    out = rollout(model)
    assert np.all(out.positions() == 1.25)


def test_train_too_short():
    t = np.array([0.0, 0.1])
    with pytest.raises(errors.EmptyDemo):
        train(Trajectory.from_arrays(t, np.zeros((2, 1))))


def test_train_rollout_reproduces_minimum_jerk():
    demo = minimum_jerk_demo()
    model = train(demo, DmpConfig(n_basis=20))
    out = rollout(model)
    ref = resample(demo, model.config.dt).positions()
    assert out.positions().shape == ref.shape
    rmse = np.sqrt(np.mean((out.positions() - ref) ** 2))
    assert rmse < 0.02  # 2% of the unit range


# --- rollout ---

def test_rollout_unforced_closed_form():
    model = untrained_model(25.0, 0.0, 1.0, 1.0)
    out = rollout(model, x0=[0.0], goal=[1.0], tau=1.0, dt=1e-3)
    xs = out.positions()[:, 0]
    exact = 1.0 - (1.0 + 5.0) * math.exp(-5.0)  # (1 + omega t) e^{-omega t} at t=1
    assert xs[-1] == pytest.approx(0.9596, abs=2e-3)
    assert abs(xs[-1] - exact) < 2e-3
    assert np.all(np.diff(xs) >= -1e-15)
    assert xs.max() <= 1.0 + 1e-6


def test_rollout_goal_scaling_equivariance():
    demo = rest_to_rest_demo(dofs=2, seed=9)
    model = train(demo)
    x0, g = model.x0, model.goal
    g2 = x0 + 2.0 * (g - x0)
    base = rollout(model, x0=x0, goal=g)
    scaled = rollout(model, x0=x0, goal=g2)
    expected = x0 + 2.0 * (base.positions() - x0)
    assert np.max(np.abs(expected - scaled.positions())) < 1e-9


def test_rollout_temporal_scaling():
    demo = rest_to_rest_demo(dofs=2, seed=1)
    model = train(demo)
    fast = rollout(model)
    slow = rollout(model, tau=2 * model.tau, dt=2 * model.config.dt)
    assert len(fast) == len(slow)
    assert np.max(np.abs(fast.positions() - slow.positions())) < 1e-9


def test_rollout_static_dofs_stay_constant():
    model = untrained_model(100.0, [0.5, 1.0], [0.5, 2.0], 1.0)
    out = rollout(model)
    assert np.all(out.positions()[:, 0] == 0.5)
    assert out.positions()[-1, 1] == pytest.approx(2.0, abs=1e-3)


def test_rollout_dimension_mismatch():
    model = untrained_model(100.0, [0.0], [1.0], 1.0)
    with pytest.raises(errors.DimensionMismatch):
        rollout(model, x0=[0.0, 0.0], goal=[1.0, 1.0])


@settings(max_examples=40, deadline=None)
@given(st.floats(4.0, 2500.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0),
       st.floats(0.5, 4.0))
def test_rollout_unforced_never_overshoots(stiffness, x0, goal, tau):
    model = untrained_model(stiffness, [x0], [goal], tau)
    out = rollout(model, dt=1e-3)
    xs = out.positions()[:, 0]
    span = abs(goal - x0)
    lo, hi = min(x0, goal), max(x0, goal)
    assert np.all(xs >= lo - 1e-6 * max(span, 1e-12))
    assert np.all(xs <= hi + 1e-6 * max(span, 1e-12))


def test_rollout_endpoint_convergence_trained():
    demo = rest_to_rest_demo(seed=7)
    model = train(demo)
    for goal in (model.goal, model.goal + 0.3, model.goal - 0.5):
        out = rollout(model, goal=goal)
        end_err = np.abs(out.positions()[-1] - goal)
        allowed = 1e-3 * np.maximum(np.abs(goal - model.x0), 1.0)
        assert np.all(end_err < allowed)


# --- serialization ---

def test_model_round_trip():
    model = train(rest_to_rest_demo(dofs=3, seed=5))
    buf = io.StringIO()
    save_model(model, buf)
    again = load_model(io.StringIO(buf.getvalue()))
    assert model_to_dict(again) == model_to_dict(model)
    assert np.array_equal(again.centers, model.centers)
    assert all(np.array_equal(a.weights, b.weights)
               for a, b in zip(again.dofs, model.dofs))


def test_model_version_check():
    with pytest.raises(errors.SchemaVersionMismatch):
        load_model(io.StringIO('{"version": 9}'))
