"""The single mutable simulation: robots with drive-based joints, interaction
modes (free-drive / ghost-drive), gripper attachment, scene objects,
recording, replay and instruction programs.

One fixed-step loop owns all mutation; everything external observes immutable
snapshots. Trajectory playback positions joints directly from the recorded
samples (exact replay); programmed point-to-point moves go through the drives
and settle detection.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import drives as drv
from .errors import (
    AlreadyRecording,
    BusyRobot,
    DimensionMismatch,
    DuplicateId,
    IndexOutOfRange,
    MalformedScene,
    NotRecording,
    UnknownRobot,
    Unreachable,
    ValidationError,
    WrongMode,
)
from .fixtures import fixture_path
from .kinematics import fk_matrices, interpolate_joint_path, solve_ik
from .trajectory import Trajectory, TrajectoryRecorder, TrajectorySample
from .transforms import Pose, invert_tf
from .urdf import build_chain, parse_urdf_file

MODE_HOLD = "hold"
MODE_FREE_DRIVE = "free_drive"
MODE_GHOST_DRIVE = "ghost_drive"
MODES = (MODE_HOLD, MODE_FREE_DRIVE, MODE_GHOST_DRIVE)

DEFAULT_SIM_DT = 1e-3
DEFAULT_GRASP_RADIUS = 0.05
DEFAULT_SETTLE_TOL = 1e-3
DEFAULT_SETTLE_TICKS = 50
DEFAULT_SAMPLE_EVERY = 10

OBJECT_SHAPES = {"box": 3, "sphere": 1, "cylinder": 2}


# --- instructions ---

@dataclass(frozen=True)
class MoveToJoints:
    q: tuple

    def to_dict(self):
        return {"type": "move_to_joints", "q": list(self.q)}


@dataclass(frozen=True)
class MoveToPose:
    pose: Pose

    def to_dict(self):
        return {"type": "move_to_pose", "pose": self.pose.to_dict()}


@dataclass(frozen=True)
class GripperOpen:
    def to_dict(self):
        return {"type": "gripper_open"}


@dataclass(frozen=True)
class GripperClose:
    def to_dict(self):
        return {"type": "gripper_close"}


def instruction_from_dict(obj: dict):
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValidationError("instruction must be an object with a 'type' field")
    kind = obj["type"]
    if kind == "move_to_joints":
        q = obj.get("q")
        if not isinstance(q, list) or not q:
            raise ValidationError("move_to_joints needs a non-empty 'q' list")
        return MoveToJoints(q=tuple(float(v) for v in q))
    if kind == "move_to_pose":
        if "pose" in obj:
            return MoveToPose(pose=Pose.from_dict(obj["pose"]))
        if "xyz" in obj:
            return MoveToPose(pose=Pose.from_xyz_rpy(obj["xyz"], obj.get("rpy", (0, 0, 0))))
        raise ValidationError("move_to_pose needs 'pose' or 'xyz'/'rpy'")
    if kind == "gripper_open":
        return GripperOpen()
    if kind == "gripper_close":
        return GripperClose()
    raise ValidationError(f"unknown instruction type {kind!r}")


def load_program(source) -> list:
    """Program file: a JSON list of instruction objects."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"bad program JSON: {exc}") from None
    if not isinstance(data, list) or not data:
        raise ValidationError("program must be a non-empty JSON list")
    return [instruction_from_dict(obj) for obj in data]


# --- scene entities ---

@dataclass
class SceneObject:
    id: str
    shape: str
    size: tuple
    pose: Pose
    attached_to: str | None = None

    def __post_init__(self):
        if self.shape not in OBJECT_SHAPES:
            raise MalformedScene(f"object {self.id!r}: unknown shape {self.shape!r}")
        if len(self.size) != OBJECT_SHAPES[self.shape] or min(self.size) <= 0:
            raise MalformedScene(f"object {self.id!r}: bad {self.shape} dimensions")

    def to_dict(self):
        return {"id": self.id, "shape": self.shape, "size": list(self.size),
                "pose": self.pose.to_dict(), "attached_to": self.attached_to}


class _Playback:
    def __init__(self, handle, traj: Trajectory, hold_on_done=False):
        self.handle = handle
        self.traj = traj
        self.times = traj.times()
        self.positions = traj.positions()
        self.grippers = [s.gripper for s in traj.samples]
        self.has_gripper = any(g is not None for g in self.grippers)
        self.duration = traj.duration
        self.elapsed = 0.0
        self.hold_on_done = hold_on_done

    def sample(self, t: float) -> np.ndarray:
        return np.array([np.interp(t, self.times, self.positions[:, d])
                         for d in range(self.positions.shape[1])])

    def gripper_at(self, t: float):
        state = None
        for tt, g in zip(self.times, self.grippers):
            if tt > t + 1e-12:
                break
            if g is not None:
                state = g
        return state


class _ProgramState:
    def __init__(self, handle, instructions):
        self.handle = handle
        self.instructions = instructions
        self.index = 0
        self.started = False
        self.settle_count = 0
        self.target = None


class _Recording:
    def __init__(self, start_tick, sample_every, recorder):
        self.start_tick = start_tick
        self.sample_every = sample_every
        self.recorder = recorder


class RobotInstance:
    def __init__(self, rid, model, chain, base_pose: Pose,
                 grasp_radius=DEFAULT_GRASP_RADIUS, q0=None):
        self.id = rid
        self.model = model
        self.chain = chain
        self.base_pose = base_pose
        self._base_tf = base_pose.to_matrix()
        self.lower, self.upper, self.velocity_limits = chain.limit_arrays()
        dof = chain.dof
        q_init = np.zeros(dof) if q0 is None else np.asarray(q0, dtype=float)
        if len(q_init) != dof:
            raise DimensionMismatch(f"robot {rid!r}: q0 has wrong length")
        self.q = np.clip(q_init, self.lower, self.upper)
        self.v = np.zeros(dof)
        self.drives = [drv.DriveParams(target_position=float(p)) for p in self.q]
        self.mode = MODE_HOLD
        self.ghost_q = None
        self.gripper_state = "open"
        self.attached_object = None
        self.attach_offset = None
        self.grasp_radius = grasp_radius
        self.playback = None
        self.program = None
        self.recording = None

    @property
    def dof(self) -> int:
        return self.chain.dof

    @property
    def busy(self) -> bool:
        return self.playback is not None or self.program is not None

    def world_fk(self):
        """World-frame cumulative transforms along the chain, base link first."""
        return [self._base_tf @ m for m in fk_matrices(self.chain, self.q)]

    def ee_tf(self) -> np.ndarray:
        return self._base_tf @ fk_matrices(self.chain, self.q)[-1]

    def retarget_drives(self, q_target, v_target=None):
        for i, drive in enumerate(self.drives):
            drive.target_position = float(q_target[i])
            drive.target_velocity = 0.0 if v_target is None else float(v_target[i])

    def active_handle(self):
        if self.playback is not None:
            return {"kind": "playback", "handle": self.playback.handle}
        if self.program is not None:
            return {"kind": "program", "handle": self.program.handle,
                    "step": self.program.index}
        return None


class Workspace:
    def __init__(self, sim_dt=DEFAULT_SIM_DT, settle_tol=DEFAULT_SETTLE_TOL,
                 settle_ticks=DEFAULT_SETTLE_TICKS):
        if sim_dt <= 0:
            raise MalformedScene("sim_dt must be positive")
        self.sim_dt = sim_dt
        self.settle_tol = settle_tol
        self.settle_ticks = settle_ticks
        self.robots = {}
        self.objects = {}
        self.tick_count = 0
        self._handle_counter = 0

    @property
    def time(self) -> float:
        return self.tick_count * self.sim_dt

    # --- construction ---

    def _check_new_id(self, entity_id):
        if not entity_id or not isinstance(entity_id, str):
            raise MalformedScene("ids must be non-empty strings")
        if entity_id in self.robots or entity_id in self.objects:
            raise DuplicateId(f"id {entity_id!r} already in use")

    def add_robot(self, rid, model, chain, base_pose=None,
                  grasp_radius=DEFAULT_GRASP_RADIUS, q0=None) -> RobotInstance:
        self._check_new_id(rid)
        robot = RobotInstance(rid, model, chain, base_pose or Pose.identity(),
                              grasp_radius=grasp_radius, q0=q0)
        self.robots[rid] = robot
        return robot

    def add_object(self, obj: SceneObject) -> SceneObject:
        self._check_new_id(obj.id)
        self.objects[obj.id] = obj
        return obj

    def _robot(self, rid) -> RobotInstance:
        robot = self.robots.get(rid)
        if robot is None:
            raise UnknownRobot(f"no robot with id {rid!r}")
        return robot

    def _new_handle(self, prefix) -> str:
        self._handle_counter += 1
        return f"{prefix}-{self._handle_counter}"

    # --- interaction ---

    def set_mode(self, rid, mode):
        robot = self._robot(rid)
        if mode not in MODES:
            raise ValidationError(f"unknown mode {mode!r}; expected one of {MODES}")
        if mode == robot.mode:
            return
        if mode == MODE_GHOST_DRIVE:
            robot.ghost_q = robot.q.copy()
        else:
            robot.ghost_q = None
        robot.retarget_drives(robot.q)
        robot.mode = mode

    def drag_joint(self, rid, joint_index, target):
        robot = self._robot(rid)
        if not 0 <= joint_index < robot.dof:
            raise IndexOutOfRange(
                f"joint index {joint_index} outside 0..{robot.dof - 1}")
        if robot.mode == MODE_HOLD:
            raise WrongMode("dragging requires free-drive or ghost-drive mode")
        target = float(np.clip(target, robot.lower[joint_index],
                               robot.upper[joint_index]))
        if robot.mode == MODE_FREE_DRIVE:
            robot.drives[joint_index].target_position = target
            robot.drives[joint_index].target_velocity = 0.0
        else:
            robot.ghost_q[joint_index] = target

    def drag_ee(self, rid, target: Pose):
        robot = self._robot(rid)
        if robot.mode == MODE_HOLD:
            raise WrongMode("dragging requires free-drive or ghost-drive mode")
        local = Pose.from_matrix(invert_tf(robot._base_tf) @ target.to_matrix())
        result = solve_ik(robot.chain, local, robot.q)
        if robot.mode == MODE_FREE_DRIVE:
            robot.retarget_drives(result.q)
        else:
            robot.ghost_q = result.q.copy()
        return result

    def commit_ghost(self, rid) -> str:
        robot = self._robot(rid)
        if robot.mode != MODE_GHOST_DRIVE:
            raise WrongMode("commit requires ghost-drive mode")
        if robot.busy:
            raise BusyRobot(f"robot {rid!r} already has an active handle")
        traj = self._joint_path(robot, robot.q, robot.ghost_q)
        handle = self._new_handle("pb")
        robot.playback = _Playback(handle, traj, hold_on_done=True)
        return handle

    def _joint_path(self, robot, q_from, q_to) -> Trajectory:
        return interpolate_joint_path(q_from, q_to, robot.velocity_limits,
                                      self.sim_dt, joint_names=robot.chain.joint_names)

    def set_gripper(self, rid, state):
        robot = self._robot(rid)
        if state not in ("open", "closed"):
            raise ValidationError(f"gripper state must be open or closed, got {state!r}")
        if state == "closed":
            robot.gripper_state = "closed"
            if robot.attached_object is None:
                self._try_attach(robot)
        else:
            robot.gripper_state = "open"
            if robot.attached_object is not None:
                self.objects[robot.attached_object].attached_to = None
                robot.attached_object = None
                robot.attach_offset = None

    def _try_attach(self, robot):
        ee = robot.ee_tf()
        best_id, best_dist = None, np.inf
        for obj in self.objects.values():
            if obj.attached_to is not None:
                continue
            dist = float(np.linalg.norm(obj.pose.position - ee[:3, 3]))
            if dist < best_dist:
                best_id, best_dist = obj.id, dist
        if best_id is not None and best_dist <= robot.grasp_radius:
            obj = self.objects[best_id]
            obj.attached_to = robot.id
            robot.attached_object = best_id
            robot.attach_offset = invert_tf(ee) @ obj.pose.to_matrix()

    def play_trajectory(self, rid, traj: Trajectory, hold_on_done=False) -> str:
        robot = self._robot(rid)
        if robot.busy:
            raise BusyRobot(f"robot {rid!r} already has an active handle")
        if traj.dof != robot.dof:
            raise DimensionMismatch(
                f"trajectory has {traj.dof} DOFs, robot has {robot.dof}")
        if len(traj) == 0:
            raise ValidationError("cannot play an empty trajectory")
        handle = self._new_handle("pb")
        robot.playback = _Playback(handle, traj, hold_on_done=hold_on_done)
        return handle

    def run_program(self, rid, instructions) -> str:
        robot = self._robot(rid)
        if robot.busy:
            raise BusyRobot(f"robot {rid!r} already has an active handle")
        if not instructions:
            raise ValidationError("program must contain at least one instruction")
        for ins in instructions:
            if isinstance(ins, MoveToJoints) and len(ins.q) != robot.dof:
                raise DimensionMismatch(
                    f"move_to_joints has {len(ins.q)} values, robot has {robot.dof}")
            if not isinstance(ins, (MoveToJoints, MoveToPose, GripperOpen, GripperClose)):
                raise ValidationError(f"unknown instruction {ins!r}")
        handle = self._new_handle("prog")
        robot.program = _ProgramState(handle, list(instructions))
        return handle

    # --- recording ---

    def start_recording(self, rid, sample_every=DEFAULT_SAMPLE_EVERY):
        robot = self._robot(rid)
        if robot.recording is not None:
            raise AlreadyRecording(f"robot {rid!r} is already recording")
        if not isinstance(sample_every, int) or sample_every < 1:
            raise ValidationError("sample_every must be a positive integer")
        recorder = TrajectoryRecorder(
            joint_names=robot.chain.joint_names, robot=rid,
            created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"))
        recorder.append(TrajectorySample(t=0.0, q=robot.q.copy(),
                                         gripper=robot.gripper_state))
        robot.recording = _Recording(self.tick_count, sample_every, recorder)

    def stop_recording(self, rid) -> Trajectory:
        robot = self._robot(rid)
        if robot.recording is None:
            raise NotRecording(f"robot {rid!r} is not recording")
        traj = robot.recording.recorder.finish()
        robot.recording = None
        return traj

    # --- the clock ---

    def tick(self) -> list:
        events = []
        new_tick = self.tick_count + 1
        for robot in self.robots.values():
            if robot.playback is not None:
                self._advance_playback(robot, events)
            else:
                if robot.program is not None:
                    self._program_begin_step(robot, events)
                self._step_drives(robot)
                if robot.program is not None:
                    self._program_check_settle(robot, events)
            if robot.attached_object is not None:
                obj = self.objects[robot.attached_object]
                obj.pose = Pose.from_matrix(robot.ee_tf() @ robot.attach_offset)
            rec = robot.recording
            if rec is not None and (new_tick - rec.start_tick) % rec.sample_every == 0:
                rec.recorder.append(TrajectorySample(
                    t=(new_tick - rec.start_tick) * self.sim_dt,
                    q=robot.q.copy(), gripper=robot.gripper_state))
        self.tick_count = new_tick
        return events

    def _step_drives(self, robot):
        dt = self.sim_dt
        for i, drive in enumerate(robot.drives):
            state = drv.step(drv.JointMotionState(robot.q[i], robot.v[i]), drive, dt)
            robot.q[i] = state.position
            robot.v[i] = state.velocity

    def _advance_playback(self, robot, events):
        pb = robot.playback
        pb.elapsed += self.sim_dt
        if pb.elapsed >= pb.duration - 1e-12:
            q_new = pb.positions[-1].copy()
            done = True
        else:
            q_new = pb.sample(pb.elapsed)
            done = False
        robot.v = (q_new - robot.q) / self.sim_dt if not done else np.zeros(robot.dof)
        robot.q = q_new
        robot.retarget_drives(robot.q)
        if pb.has_gripper:
            state = pb.gripper_at(min(pb.elapsed, pb.duration))
            if state is not None and state != robot.gripper_state:
                self.set_gripper(robot.id, state)
        if done:
            robot.playback = None
            if pb.hold_on_done:
                robot.mode = MODE_HOLD
                robot.ghost_q = None
            events.append({"type": "playback_done", "robot": robot.id,
                           "handle": pb.handle})

    def _program_begin_step(self, robot, events):
        """Start the pending instruction, if any. Gripper instructions apply
        and finish within this one tick; moves set drive targets and wait for
        settle detection."""
        prog = robot.program
        if prog is None or prog.started:
            return
        if prog.index >= len(prog.instructions):
            events.append({"type": "program_done", "robot": robot.id,
                           "handle": prog.handle})
            robot.program = None
            return
        ins = prog.instructions[prog.index]
        if isinstance(ins, (GripperOpen, GripperClose)):
            self.set_gripper(robot.id,
                             "open" if isinstance(ins, GripperOpen) else "closed")
            events.append({"type": "program_step_done", "robot": robot.id,
                           "handle": prog.handle, "step": prog.index})
            prog.index += 1
            if prog.index >= len(prog.instructions):
                events.append({"type": "program_done", "robot": robot.id,
                               "handle": prog.handle})
                robot.program = None
            return
        if isinstance(ins, MoveToJoints):
            prog.target = np.clip(np.asarray(ins.q, dtype=float),
                                  robot.lower, robot.upper)
        else:
            local = Pose.from_matrix(invert_tf(robot._base_tf) @ ins.pose.to_matrix())
            try:
                result = solve_ik(robot.chain, local, robot.q)
            except Unreachable as exc:
                events.append({"type": "program_aborted", "robot": robot.id,
                               "handle": prog.handle, "step": prog.index,
                               "error": exc.code})
                robot.program = None
                robot.retarget_drives(robot.q)
                return
            prog.target = result.q
        robot.retarget_drives(prog.target)
        prog.started = True
        prog.settle_count = 0

    def _program_check_settle(self, robot, events):
        prog = robot.program
        if prog is None or not prog.started:
            return
        settled = (np.all(np.abs(robot.q - prog.target) < self.settle_tol)
                   and np.all(np.abs(robot.v) < self.settle_tol))
        prog.settle_count = prog.settle_count + 1 if settled else 0
        if prog.settle_count >= self.settle_ticks:
            events.append({"type": "program_step_done", "robot": robot.id,
                           "handle": prog.handle, "step": prog.index})
            prog.index += 1
            prog.started = False
            prog.target = None
            if prog.index >= len(prog.instructions):
                events.append({"type": "program_done", "robot": robot.id,
                               "handle": prog.handle})
                robot.program = None

    # --- observation ---

    def snapshot(self) -> dict:
        robots = []
        for robot in self.robots.values():
            world = robot.world_fk()
            entry = {
                "id": robot.id,
                "q": [float(v) for v in robot.q],
                "qd": [float(v) for v in robot.v],
                "mode": robot.mode,
                "ghost_q": None if robot.ghost_q is None
                           else [float(v) for v in robot.ghost_q],
                "ee_pose": Pose.from_matrix(world[-1]).to_dict(),
                "link_poses": [Pose.from_matrix(m).to_dict() for m in world],
                "gripper": {"state": robot.gripper_state,
                            "attached": robot.attached_object},
                "recording": robot.recording is not None,
                "active": robot.active_handle(),
            }
            if robot.mode == MODE_GHOST_DRIVE and robot.ghost_q is not None:
                ghost_world = [robot._base_tf @ m
                               for m in fk_matrices(robot.chain, robot.ghost_q)]
                entry["ghost_link_poses"] = [Pose.from_matrix(m).to_dict()
                                             for m in ghost_world]
            else:
                entry["ghost_link_poses"] = None
            robots.append(entry)
        return {
            "tick": self.tick_count,
            "time": self.time,
            "robots": robots,
            "objects": [obj.to_dict() for obj in self.objects.values()],
        }

    def scene_description(self) -> dict:
        """Static geometry sent once per connection; snapshots carry poses only."""
        robots = []
        for robot in self.robots.values():
            link_map = robot.model.link_map
            robots.append({
                "id": robot.id,
                "name": robot.model.name,
                "base_pose": robot.base_pose.to_dict(),
                "joint_names": list(robot.chain.joint_names),
                "limits": {"lower": [float(v) for v in robot.lower],
                           "upper": [float(v) for v in robot.upper],
                           "velocity": [float(v) for v in robot.velocity_limits]},
                "chain_links": [
                    {"name": name,
                     "visuals": [p.to_dict() for p in link_map[name].visuals]}
                    for name in robot.chain.link_names],
                "grasp_radius": robot.grasp_radius,
            })
        return {
            "sim_dt": self.sim_dt,
            "robots": robots,
            "objects": [obj.to_dict() for obj in self.objects.values()],
        }


def _require(cond, message):
    if not cond:
        raise MalformedScene(message)


def _pose_from_scene(obj) -> Pose:
    if obj is None:
        return Pose.identity()
    _require(isinstance(obj, dict), "pose must be an object with xyz/rpy")
    xyz = obj.get("xyz", (0.0, 0.0, 0.0))
    rpy = obj.get("rpy", (0.0, 0.0, 0.0))
    _require(isinstance(xyz, (list, tuple)) and len(xyz) == 3, "pose xyz needs 3 numbers")
    _require(isinstance(rpy, (list, tuple)) and len(rpy) == 3, "pose rpy needs 3 numbers")
    return Pose.from_xyz_rpy(xyz, rpy)


def _default_tip(model) -> str:
    parents = {j.parent for j in model.joints}
    leaves = [l.name for l in model.links if l.name not in parents]
    if len(leaves) != 1:
        raise MalformedScene(
            f"robot {model.name!r} has {len(leaves)} leaf links; specify tip_link")
    return leaves[0]


def load_scene(source, base_dir=None) -> Workspace:
    """Build a Workspace from a scene descriptor (dict, path, or file object).

    Descriptor shape:
      {"robots": [{"id", "urdf", "base_pose": {"xyz", "rpy"}, "tip_link"?,
                   "base_link"?, "q0"?, "grasp_radius"?}],
       "objects": [{"id", "shape", "size", "pose"}],
       "sim_dt"?, "settle_tol"?, "settle_ticks"?}

    URDF paths resolve relative to the scene file; "fixture:<name>" pulls
    from the packaged corpus.
    """
    if isinstance(source, (str, os.PathLike)):
        base_dir = base_dir or os.path.dirname(os.fspath(source))
        try:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise MalformedScene(f"cannot read scene: {exc}") from None
        try:
            descriptor = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedScene(f"bad scene JSON: {exc}") from None
    elif hasattr(source, "read"):
        try:
            descriptor = json.loads(source.read())
        except json.JSONDecodeError as exc:
            raise MalformedScene(f"bad scene JSON: {exc}") from None
    else:
        descriptor = source
    _require(isinstance(descriptor, dict), "scene descriptor must be a JSON object")

    sim_dt = descriptor.get("sim_dt", DEFAULT_SIM_DT)
    _require(isinstance(sim_dt, (int, float)) and sim_dt > 0, "sim_dt must be positive")
    ws = Workspace(sim_dt=float(sim_dt),
                   settle_tol=float(descriptor.get("settle_tol", DEFAULT_SETTLE_TOL)),
                   settle_ticks=int(descriptor.get("settle_ticks", DEFAULT_SETTLE_TICKS)))

    robots = descriptor.get("robots", [])
    _require(isinstance(robots, list), "'robots' must be a list")
    for entry in robots:
        _require(isinstance(entry, dict), "robot entries must be objects")
        rid = entry.get("id")
        _require(isinstance(rid, str) and rid, "robot entries need a string id")
        urdf_ref = entry.get("urdf")
        _require(isinstance(urdf_ref, str) and urdf_ref, f"robot {rid!r} needs a 'urdf'")
        if urdf_ref.startswith("fixture:"):
            try:
                path = fixture_path(urdf_ref.split(":", 1)[1])
            except KeyError as exc:
                raise MalformedScene(str(exc)) from None
        elif os.path.isabs(urdf_ref) or not base_dir:
            path = urdf_ref
        else:
            path = os.path.join(base_dir, urdf_ref)
        model = parse_urdf_file(path)
        base_link = entry.get("base_link", model.root_link)
        tip_link = entry.get("tip_link") or _default_tip(model)
        chain = build_chain(model, base_link, tip_link)
        ws.add_robot(rid, model, chain,
                     base_pose=_pose_from_scene(entry.get("base_pose")),
                     grasp_radius=float(entry.get("grasp_radius", DEFAULT_GRASP_RADIUS)),
                     q0=entry.get("q0"))

    objects = descriptor.get("objects", [])
    _require(isinstance(objects, list), "'objects' must be a list")
    for entry in objects:
        _require(isinstance(entry, dict), "object entries must be objects")
        oid = entry.get("id")
        _require(isinstance(oid, str) and oid, "object entries need a string id")
        shape = entry.get("shape")
        size = entry.get("size")
        _require(isinstance(size, (list, tuple)) and size, f"object {oid!r} needs a size")
        ws.add_object(SceneObject(id=oid, shape=shape, size=tuple(float(v) for v in size),
                                  pose=_pose_from_scene(entry.get("pose"))))
    return ws
