"""Timestamped multi-DOF trajectories: the demonstration and replay currency.

Storage format is JSON lines (``.traj.jsonl``): a header object on line 1,
then one sample object per line. Floats round-trip exactly (shortest repr),
so save -> load is bit-identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DofMismatch,
    EvenWindow,
    MalformedRecord,
    NonMonotonicTime,
    SchemaVersionMismatch,
    TooFewSamples,
)

FORMAT_VERSION = 1
GRIPPER_STATES = ("open", "closed")


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    q: np.ndarray
    qd: np.ndarray | None = None
    gripper: str | None = None

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(-1)
        if not np.isfinite(self.t) or not np.isfinite(q).all():
            raise MalformedRecord("sample contains non-finite values")
        object.__setattr__(self, "q", q)
        if self.qd is not None:
            qd = np.asarray(self.qd, dtype=float).reshape(-1)
            if qd.shape != q.shape or not np.isfinite(qd).all():
                raise MalformedRecord("qd must match q and be finite")
            object.__setattr__(self, "qd", qd)
        if self.gripper is not None and self.gripper not in GRIPPER_STATES:
            raise MalformedRecord(f"gripper state {self.gripper!r} invalid")


@dataclass
class Trajectory:
    samples: list
    dof: int
    joint_names: tuple = ()
    robot: str | None = None
    created_at: str | None = None

    def __post_init__(self):
        if self.samples:
            if abs(self.samples[0].t) > 0.0:
                raise NonMonotonicTime("first sample must be at t = 0")
            for prev, cur in zip(self.samples, self.samples[1:]):
                if cur.t <= prev.t:
                    raise NonMonotonicTime(f"t {cur.t} does not increase past {prev.t}")
            for s in self.samples:
                if len(s.q) != self.dof:
                    raise DofMismatch(f"sample has {len(s.q)} DOFs, expected {self.dof}")
        self.joint_names = tuple(self.joint_names)

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return self.samples[-1].t if self.samples else 0.0

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def positions(self) -> np.ndarray:
        return np.array([s.q for s in self.samples]).reshape(len(self.samples), self.dof)

    def velocities(self) -> np.ndarray | None:
        if any(s.qd is None for s in self.samples):
            return None
        return np.array([s.qd for s in self.samples])

    def sample_at(self, t: float) -> np.ndarray:
        """Linear interpolation of q at time t, clamped to the time range."""
        times = self.times()
        pos = self.positions()
        return np.array([np.interp(t, times, pos[:, d]) for d in range(self.dof)])

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        if (self.dof != other.dof or self.joint_names != other.joint_names
                or self.robot != other.robot or self.created_at != other.created_at
                or len(self.samples) != len(other.samples)):
            return False
        for a, b in zip(self.samples, other.samples):
            if a.t != b.t or not np.array_equal(a.q, b.q) or a.gripper != b.gripper:
                return False
            if (a.qd is None) != (b.qd is None):
                return False
            if a.qd is not None and not np.array_equal(a.qd, b.qd):
                return False
        return True

    @staticmethod
    def from_arrays(times, positions, velocities=None, grippers=None,
                    joint_names=(), robot=None, created_at=None) -> "Trajectory":
        times = np.asarray(times, dtype=float)
        positions = np.asarray(positions, dtype=float)
        if positions.ndim == 1:
            positions = positions.reshape(-1, 1)
        samples = []
        for i, t in enumerate(times):
            samples.append(TrajectorySample(
                t=float(t), q=positions[i],
                qd=None if velocities is None else np.asarray(velocities[i], dtype=float),
                gripper=None if grippers is None else grippers[i]))
        return Trajectory(samples=samples, dof=positions.shape[1],
                          joint_names=joint_names, robot=robot, created_at=created_at)


class TrajectoryRecorder:
    """Single-writer recording sink; produces an immutable Trajectory."""

    def __init__(self, joint_names=(), robot=None, created_at=None):
        self.joint_names = tuple(joint_names)
        self.robot = robot
        self.created_at = created_at
        self._samples = []
        self._dof = None

    def __len__(self):
        return len(self._samples)

    def append(self, sample: TrajectorySample):
        if self._samples:
            if sample.t <= self._samples[-1].t:
                raise NonMonotonicTime(
                    f"t {sample.t} does not increase past {self._samples[-1].t}")
            if len(sample.q) != self._dof:
                raise DofMismatch(f"got {len(sample.q)} DOFs, expected {self._dof}")
        else:
            if sample.t != 0.0:
                raise NonMonotonicTime("first sample must be at t = 0")
            self._dof = len(sample.q)
        self._samples.append(sample)

    def finish(self) -> Trajectory:
        return Trajectory(samples=list(self._samples), dof=self._dof or 0,
                          joint_names=self.joint_names, robot=self.robot,
                          created_at=self.created_at)


def resample(traj: Trajectory, dt: float) -> Trajectory:
    """Uniform grid 0..duration at step dt, linear interpolation.

    First and last samples are preserved exactly; gripper state carries from
    the nearest preceding original sample.
    """
    if len(traj) < 2:
        raise TooFewSamples("resample needs at least 2 samples")
    if dt <= 0:
        raise ValueError("dt must be positive")
    duration = traj.duration
    times = traj.times()
    pos = traj.positions()

    m = int(np.floor(duration / dt + 1e-9))
    grid = [k * dt for k in range(m + 1)]
    if duration - grid[-1] > 1e-9 * max(1.0, duration):
        grid.append(duration)
    else:
        grid[-1] = duration
    grid = np.array(grid)

    out = np.empty((len(grid), traj.dof))
    for d in range(traj.dof):
        out[:, d] = np.interp(grid, times, pos[:, d])
    out[0] = pos[0]
    out[-1] = pos[-1]

    grippers = None
    if any(s.gripper is not None for s in traj.samples):
        grippers = []
        state = None
        idx = 0
        for t in grid:
            while idx + 1 < len(traj) and times[idx + 1] <= t + 1e-12:
                idx += 1
            state = traj.samples[idx].gripper if traj.samples[idx].gripper is not None else state
            grippers.append(state)

    return Trajectory.from_arrays(grid, out, grippers=grippers,
                                  joint_names=traj.joint_names, robot=traj.robot,
                                  created_at=traj.created_at)


def differentiate(traj: Trajectory):
    """Velocities and accelerations of a uniformly sampled trajectory.

    Central differences on interior points, second-order one-sided at the
    ends. Returns (vel, acc) arrays shaped (n_samples, dof).
    """
    n = len(traj)
    if n < 3:
        raise TooFewSamples("differentiate needs at least 3 samples")
    times = traj.times()
    steps = np.diff(times)
    dt = steps[0]
    if np.max(np.abs(steps - dt)) > 1e-6 * max(dt, 1e-12):
        raise ValueError("differentiate requires uniform sampling")

    q = traj.positions()
    vel = np.empty_like(q)
    vel[1:-1] = (q[2:] - q[:-2]) / (2.0 * dt)
    vel[0] = (-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * dt)
    vel[-1] = (3.0 * q[-1] - 4.0 * q[-2] + q[-3]) / (2.0 * dt)

    acc = np.empty_like(q)
    acc[1:-1] = (q[2:] - 2.0 * q[1:-1] + q[:-2]) / (dt * dt)
    if n >= 4:
        acc[0] = (2.0 * q[0] - 5.0 * q[1] + 4.0 * q[2] - q[3]) / (dt * dt)
        acc[-1] = (2.0 * q[-1] - 5.0 * q[-2] + 4.0 * q[-3] - q[-4]) / (dt * dt)
    else:
        acc[0] = acc[1]
        acc[-1] = acc[-2]
    return vel, acc


def smooth(traj: Trajectory, window: int) -> Trajectory:
    """Centered moving average per DOF; endpoints use shrunken windows so
    timestamps and endpoints stay put."""
    if window < 1 or window % 2 == 0:
        raise EvenWindow(f"window must be odd and >= 1, got {window}")
    n = len(traj)
    if n == 0 or window == 1:
        return traj
    q = traj.positions()
    cs = np.vstack([np.zeros((1, traj.dof)), np.cumsum(q, axis=0)])
    idx = np.arange(n)
    half = np.minimum(np.minimum(idx, n - 1 - idx), window // 2)
    lo = idx - half
    hi = idx + half
    out = (cs[hi + 1] - cs[lo]) / (hi - lo + 1)[:, None]

    samples = [TrajectorySample(t=s.t, q=out[i], qd=None, gripper=s.gripper)
               for i, s in enumerate(traj.samples)]
    return Trajectory(samples=samples, dof=traj.dof, joint_names=traj.joint_names,
                      robot=traj.robot, created_at=traj.created_at)


def _sample_to_obj(s: TrajectorySample) -> dict:
    obj = {"t": s.t, "q": [float(v) for v in s.q]}
    if s.qd is not None:
        obj["qd"] = [float(v) for v in s.qd]
    if s.gripper is not None:
        obj["gripper"] = s.gripper
    return obj


def save(traj: Trajectory, sink):
    """Write JSON-lines: header object then one object per sample."""
    header = {"version": FORMAT_VERSION, "dof": traj.dof,
              "joint_names": list(traj.joint_names), "robot": traj.robot}
    if traj.created_at is not None:
        header["created_at"] = traj.created_at
    lines = [json.dumps(header, allow_nan=False)]
    lines.extend(json.dumps(_sample_to_obj(s), allow_nan=False) for s in traj.samples)
    text = "\n".join(lines) + "\n"
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)


def load(source) -> Trajectory:
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedRecord("empty trajectory file", line=1)

    def parse_line(ln, num):
        try:
            obj = json.loads(ln)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"line {num}: {exc}", line=num) from None
        if not isinstance(obj, dict):
            raise MalformedRecord(f"line {num}: expected an object", line=num)
        return obj

    header = parse_line(lines[0], 1)
    if header.get("version") != FORMAT_VERSION:
        raise SchemaVersionMismatch(
            f"unsupported trajectory format version {header.get('version')!r}")
    try:
        dof = int(header["dof"])
        joint_names = tuple(header.get("joint_names", ()))
        robot = header.get("robot")
        created_at = header.get("created_at")
    except (KeyError, TypeError, ValueError):
        raise MalformedRecord("line 1: bad header fields", line=1) from None

    samples = []
    for num, ln in enumerate(lines[1:], start=2):
        obj = parse_line(ln, num)
        if "t" not in obj or "q" not in obj:
            raise MalformedRecord(f"line {num}: missing 't' or 'q'", line=num)
        t, q = obj["t"], obj["q"]
        if not isinstance(t, (int, float)) or not isinstance(q, list) or len(q) != dof \
                or not all(isinstance(v, (int, float)) for v in q):
            raise MalformedRecord(f"line {num}: bad sample fields", line=num)
        qd = obj.get("qd")
        if qd is not None and (not isinstance(qd, list) or len(qd) != dof):
            raise MalformedRecord(f"line {num}: bad qd", line=num)
        gripper = obj.get("gripper")
        if gripper is not None and gripper not in GRIPPER_STATES:
            raise MalformedRecord(f"line {num}: bad gripper state", line=num)
        try:
            samples.append(TrajectorySample(t=float(t), q=np.array(q, dtype=float),
                                            qd=None if qd is None else np.array(qd, dtype=float),
                                            gripper=gripper))
        except MalformedRecord as exc:
            raise MalformedRecord(f"line {num}: {exc.message}", line=num) from None

    return Trajectory(samples=samples, dof=dof, joint_names=joint_names,
                      robot=robot, created_at=created_at)
