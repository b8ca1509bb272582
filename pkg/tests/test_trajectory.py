import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from teachbench import errors
from teachbench.trajectory import (
    Trajectory,
    TrajectoryRecorder,
    TrajectorySample,
    differentiate,
    load,
    resample,
    save,
    smooth,
)


def make_traj(times, values, **kw):
    return Trajectory.from_arrays(np.asarray(times, dtype=float),
                                  np.asarray(values, dtype=float), **kw)


def test_recorder_accepts_zero_start():
    rec = TrajectoryRecorder()
    rec.append(TrajectorySample(t=0.0, q=np.array([1.0, 2.0])))
    assert len(rec) == 1


def test_recorder_rejects_nonzero_start():
    rec = TrajectoryRecorder()
    with pytest.raises(errors.NonMonotonicTime):
        rec.append(TrajectorySample(t=0.5, q=np.array([1.0])))


def test_recorder_rejects_equal_time():
    rec = TrajectoryRecorder()
    rec.append(TrajectorySample(t=0.0, q=np.array([1.0])))
    with pytest.raises(errors.NonMonotonicTime):
        rec.append(TrajectorySample(t=0.0, q=np.array([2.0])))


def test_recorder_rejects_dof_change():
    rec = TrajectoryRecorder()
    rec.append(TrajectorySample(t=0.0, q=np.array([1.0])))
    with pytest.raises(errors.DofMismatch):
        rec.append(TrajectorySample(t=0.1, q=np.array([1.0, 2.0])))


def test_resample_linear():
    traj = make_traj([0.0, 2.0], [[0.0], [4.0]])
    out = resample(traj, 1.0)
    assert np.allclose(out.times(), [0, 1, 2])
    assert np.allclose(out.positions().ravel(), [0, 2, 4])


def test_resample_idempotent_on_uniform():
    times = [k * 0.1 for k in range(11)]
    traj = make_traj(times, [[t * 2] for t in times])
    out = resample(traj, 0.1)
    assert np.array_equal(out.times(), traj.times())
    assert np.array_equal(out.positions(), traj.positions())


def test_resample_preserves_endpoints_exactly():
    traj = make_traj([0.0, 0.31, 0.77], [[0.1], [5.3], [-2.2]])
    out = resample(traj, 0.1)
    assert out.times()[0] == 0.0
    assert out.times()[-1] == 0.77
    assert out.positions()[0, 0] == 0.1
    assert out.positions()[-1, 0] == -2.2


def test_resample_jittered_ramp():
    rng = np.random.default_rng(0)
    slope = 3.0
    times = np.array([k * 0.01 + (rng.uniform(-9e-4, 9e-4) if 0 < k < 100 else 0.0)
                      for k in range(101)])
    traj = make_traj(times, slope * times.reshape(-1, 1))
    out = resample(traj, 0.01)
    ideal = slope * out.times()
    assert np.max(np.abs(out.positions().ravel() - ideal)) < 1e-3 * slope


def test_resample_carries_gripper_from_preceding_sample():
    samples = [
        TrajectorySample(t=0.0, q=np.array([0.0]), gripper="open"),
        TrajectorySample(t=0.1, q=np.array([1.0])),
        TrajectorySample(t=0.2, q=np.array([2.0]), gripper="closed"),
        TrajectorySample(t=0.3, q=np.array([3.0])),
    ]
    traj = Trajectory(samples=samples, dof=1)
    out = resample(traj, 0.05)
    states = [s.gripper for s in out.samples]
    assert states == ["open", "open", "open", "open", "closed", "closed", "closed"]


def test_resample_too_few():
    traj = make_traj([0.0], [[1.0]])
    with pytest.raises(errors.TooFewSamples):
        resample(traj, 0.1)


def test_differentiate_ramp_exact():
    times = np.arange(0, 1.0001, 0.01)
    traj = make_traj(times, times.reshape(-1, 1))
    vel, acc = differentiate(traj)
    assert np.allclose(vel, 1.0, atol=1e-12)
    assert np.allclose(acc, 0.0, atol=1e-9)


def test_differentiate_quadratic():
    times = np.arange(0, 1.0001, 0.01)
    traj = make_traj(times, (times ** 2).reshape(-1, 1))
    vel, acc = differentiate(traj)
    assert np.allclose(acc[1:-1], 2.0, atol=1e-9)


def test_differentiate_sin_velocity_error():
    times = np.arange(0, 1.0001, 1e-3)
    traj = make_traj(times, np.sin(times).reshape(-1, 1))
    vel, _ = differentiate(traj)
    assert np.max(np.abs(vel.ravel() - np.cos(times))) < 1e-6


def test_differentiate_too_few():
    with pytest.raises(errors.TooFewSamples):
        differentiate(make_traj([0.0, 1.0], [[0.0], [1.0]]))


def test_smooth_window_one_is_identity():
    traj = make_traj([0, 0.1, 0.2], [[1.0], [5.0], [2.0]])
    out = smooth(traj, 1)
    assert np.array_equal(out.positions(), traj.positions())


def test_smooth_constant_invariant():
    traj = make_traj(np.arange(0, 1, 0.1), np.full((10, 2), 3.3))
    out = smooth(traj, 5)
    assert np.allclose(out.positions(), 3.3, atol=1e-12)


def test_smooth_reduces_alternating_noise():
    n = 101
    times = np.arange(n) * 0.01
    eps = 0.01
    ramp = 2.0 * times
    noisy = ramp + eps * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    out = smooth(make_traj(times, noisy.reshape(-1, 1)), 3)
    residual = out.positions().ravel() - ramp
    assert np.max(np.abs(residual[1:-1])) <= eps / 3 + 1e-12


def test_smooth_even_window_rejected():
    traj = make_traj([0, 0.1], [[0.0], [1.0]])
    with pytest.raises(errors.EvenWindow):
        smooth(traj, 4)


def test_save_load_round_trip_exact():
    rng = np.random.default_rng(42)
    times = np.concatenate([[0.0], np.cumsum(rng.uniform(1e-4, 0.2, size=999))])
    values = rng.standard_normal((1000, 3))
    grippers = [None if i % 7 else "closed" for i in range(1000)]
    traj = Trajectory.from_arrays(times, values, grippers=grippers,
                                  joint_names=("a", "b", "c"), robot="r1",
                                  created_at="2026-01-01T00:00:00+00:00")
    buf = io.StringIO()
    save(traj, buf)
    again = load(io.StringIO(buf.getvalue()))
    assert again == traj


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(1e-6, 1.0),
                          st.floats(-1e6, 1e6, allow_nan=False)),
                min_size=1, max_size=40))
def test_save_load_round_trip_property(steps):
    t = 0.0
    samples = [TrajectorySample(t=0.0, q=np.array([steps[0][1]]))]
    for dt, v in steps[1:]:
        t += dt
        samples.append(TrajectorySample(t=t, q=np.array([v])))
    traj = Trajectory(samples=samples, dof=1)
    buf = io.StringIO()
    save(traj, buf)
    assert load(io.StringIO(buf.getvalue())) == traj


def test_load_rejects_decreasing_time():
    text = "\n".join([
        json.dumps({"version": 1, "dof": 1, "joint_names": [], "robot": None}),
        json.dumps({"t": 0.0, "q": [0.0]}),
        json.dumps({"t": 0.2, "q": [1.0]}),
        json.dumps({"t": 0.1, "q": [2.0]}),
    ])
    with pytest.raises(errors.NonMonotonicTime):
        load(io.StringIO(text))


def test_load_missing_q_reports_line():
    text = "\n".join([
        json.dumps({"version": 1, "dof": 1, "joint_names": [], "robot": None}),
        json.dumps({"t": 0.0, "q": [0.0]}),
        json.dumps({"t": 0.1}),
    ])
    with pytest.raises(errors.MalformedRecord) as excinfo:
        load(io.StringIO(text))
    assert excinfo.value.line == 3


def test_load_version_mismatch():
    text = json.dumps({"version": 99, "dof": 1, "joint_names": [], "robot": None})
    with pytest.raises(errors.SchemaVersionMismatch):
        load(io.StringIO(text))


def test_load_bad_json_line():
    text = "\n".join([
        json.dumps({"version": 1, "dof": 1, "joint_names": [], "robot": None}),
        "{nope",
    ])
    with pytest.raises(errors.MalformedRecord) as excinfo:
        load(io.StringIO(text))
    assert excinfo.value.line == 2
