"""Expose a workspace over a persistent bidirectional WebSocket channel.

One asyncio event loop owns everything: per-connection reader tasks feed an
ordered mailbox, the simulation task drains the mailbox at tick boundaries,
steps the engine (1 kHz regardless of broadcast rate) and broadcasts
snapshots at a decimated cadence. Writers drain acks in order; snapshots go
through a latest-wins slot of depth 1, so a slow consumer drops stale frames
but never acks.

Frames are JSON text messages discriminated by a "type" field; commands are
``{"id", "type", "payload"}`` and every command gets exactly one ack. See
docs/protocol.md for the full message catalogue.
"""
from __future__ import annotations

import asyncio
import collections
import json
import os

from websockets.asyncio.server import serve as ws_serve
from websockets.exceptions import ConnectionClosed

from . import dmp as dmp_mod
from . import trajectory as traj_mod
from .errors import (
    BindFailure,
    UnknownCommand,
    ValidationError,
    WorkbenchError,
)
from .transforms import Pose
from .workspace import Workspace, instruction_from_dict

DEFAULT_ADDR = "127.0.0.1:8765"
DEFAULT_DATA_DIR = "workbench_data"
DEFAULT_BROADCAST_HZ = 60.0


def resolve_addr(addr: str | None = None) -> tuple:
    """CLI flag beats WORKBENCH_ADDR beats the built-in default."""
    addr = addr or os.environ.get("WORKBENCH_ADDR") or DEFAULT_ADDR
    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise ValidationError(f"address {addr!r} is not host:port")
    return host, int(port)


def resolve_data_dir(path: str | None = None) -> str:
    return path or os.environ.get("WORKBENCH_DATA") or DEFAULT_DATA_DIR


class _Connection:
    def __init__(self, websocket):
        self.websocket = websocket
        self.subscribed = False
        self.seen_ids = set()
        self.frames = collections.deque()
        self.latest_snapshot = None
        self.snapshot_fresh = False
        self.wakeup = asyncio.Event()

    def send_frame(self, text: str):
        self.frames.append(text)
        self.wakeup.set()

    def offer_snapshot(self, text: str):
        self.latest_snapshot = text
        self.snapshot_fresh = True
        self.wakeup.set()


class WorkbenchService:
    """Owns the workspace, artifact stores and all connections."""

    def __init__(self, workspace: Workspace, data_dir: str | None = None,
                 broadcast_hz: float = DEFAULT_BROADCAST_HZ, speed: float = 1.0):
        if speed <= 0:
            raise ValidationError("speed must be positive")
        self.workspace = workspace
        self.data_dir = resolve_data_dir(data_dir)
        self.speed = speed
        ticks_per_second = 1.0 / workspace.sim_dt
        self.broadcast_every = max(1, int(round(ticks_per_second / broadcast_hz)))
        self.trajectories = {}
        self.models = {}
        self._traj_counter = 0
        self._model_counter = 0
        self._mailbox = asyncio.Queue()
        self._connections = set()
        self._server = None
        self._sim_task = None
        self.address = None

    # --- lifecycle ---

    async def start(self, host: str, port: int):
        try:
            self._server = await ws_serve(self._handle_connection, host, port)
        except OSError as exc:
            raise BindFailure(f"cannot bind {host}:{port}: {exc}") from None
        sock = next(iter(self._server.sockets))
        self.address = sock.getsockname()[:2]
        self._sim_task = asyncio.create_task(self._sim_loop())

    async def stop(self):
        if self._sim_task is not None:
            self._sim_task.cancel()
            try:
                await self._sim_task
            except asyncio.CancelledError:
                pass
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def run_until_cancelled(self):
        await asyncio.Future()

    # --- connection handling ---

    async def _handle_connection(self, websocket):
        conn = _Connection(websocket)
        self._connections.add(conn)
        writer = asyncio.create_task(self._writer(conn))
        try:
            async for raw in websocket:
                self._ingest(conn, raw)
        except ConnectionClosed:
            pass
        finally:
            self._connections.discard(conn)
            writer.cancel()
            try:
                await writer
            except asyncio.CancelledError:
                pass

    def _ingest(self, conn, raw):
        try:
            msg = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            conn.send_frame(json.dumps({
                "type": "error",
                "error": {"code": "malformed_frame", "message": str(exc)}}))
            return
        if not isinstance(msg, dict) or not isinstance(msg.get("type"), str) \
                or not isinstance(msg.get("id"), str):
            conn.send_frame(json.dumps({
                "type": "error",
                "error": {"code": "malformed_frame",
                          "message": "commands need string 'id' and 'type'"}}))
            return
        self._mailbox.put_nowait((conn, msg))

    async def _writer(self, conn):
        while True:
            await conn.wakeup.wait()
            conn.wakeup.clear()
            while conn.frames:
                await conn.websocket.send(conn.frames.popleft())
            if conn.snapshot_fresh:
                conn.snapshot_fresh = False
                await conn.websocket.send(conn.latest_snapshot)

    # --- simulation loop ---

    async def _sim_loop(self):
        """Pace the simulation at `speed` times wall clock; commands drain at
        tick boundaries.

        Each iteration ticks a bounded burst so reader/writer tasks always
        interleave; a backlog beyond a short stall threshold is dropped
        (wall time lost, cadence kept) instead of burned down in one burst."""
        loop = asyncio.get_running_loop()
        sim_dt = self.workspace.sim_dt
        start_wall = loop.time()
        start_tick = self.workspace.tick_count
        chunk = max(1, int(self.speed * 0.002 / sim_dt))
        burst_cap = 4 * chunk
        stall_cap = max(1000, 100 * chunk)
        while True:
            self._drain_mailbox()
            elapsed = loop.time() - start_wall
            target = start_tick + int(elapsed * self.speed / sim_dt)
            behind = target - self.workspace.tick_count
            if behind > stall_cap:
                start_wall = loop.time()
                start_tick = self.workspace.tick_count
                behind = 0
            for _ in range(min(behind, burst_cap)):
                self._tick_once()
            await asyncio.sleep(0.002)

    def _tick_once(self):
        self.workspace.tick()
        if self.workspace.tick_count % self.broadcast_every == 0:
            snap = self.workspace.snapshot()
            snap["type"] = "snapshot"
            text = json.dumps(snap)
            for conn in self._connections:
                if conn.subscribed:
                    conn.offer_snapshot(text)

    def _drain_mailbox(self):
        while True:
            try:
                conn, msg = self._mailbox.get_nowait()
            except asyncio.QueueEmpty:
                return
            ack = self._apply_command(conn, msg)
            conn.send_frame(json.dumps(ack))

    # --- command dispatch ---

    def _apply_command(self, conn, msg) -> dict:
        cmd_id = msg["id"]
        if cmd_id in conn.seen_ids:
            return {"type": "ack", "id": cmd_id, "ok": False,
                    "error": {"code": "validation_error",
                              "message": "command id reused on this connection"}}
        conn.seen_ids.add(cmd_id)
        try:
            result = self._dispatch(conn, msg["type"], msg.get("payload") or {})
            return {"type": "ack", "id": cmd_id, "ok": True, "result": result}
        except WorkbenchError as exc:
            return {"type": "ack", "id": cmd_id, "ok": False,
                    "error": {"code": exc.code, "message": exc.message}}

    def _dispatch(self, conn, kind, payload):
        if not isinstance(payload, dict):
            raise ValidationError("payload must be an object")
        handler = getattr(self, f"_cmd_{kind}", None)
        if handler is None:
            raise UnknownCommand(f"unknown command type {kind!r}")
        return handler(conn, payload)

    @staticmethod
    def _field(payload, key, types, what):
        value = payload.get(key)
        if not isinstance(value, types) or isinstance(value, bool):
            raise ValidationError(f"{key!r} must be {what}")
        return value

    def _vector(self, payload, key, length=None, required=True):
        value = payload.get(key)
        if value is None and not required:
            return None
        if not isinstance(value, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ValidationError(f"{key!r} must be a list of numbers")
        if length is not None and len(value) != length:
            raise ValidationError(f"{key!r} must have length {length}")
        return [float(v) for v in value]

    # each _cmd_* returns the ack's result object

    def _cmd_subscribe(self, conn, payload):
        conn.subscribed = True
        scene = self.workspace.scene_description()
        scene["type"] = "scene"
        conn.send_frame(json.dumps(scene))
        return {"broadcast_every": self.broadcast_every}

    def _cmd_set_mode(self, conn, payload):
        robot = self._field(payload, "robot", str, "a robot id")
        mode = self._field(payload, "mode", str, "a mode name")
        self.workspace.set_mode(robot, mode)
        return {}

    def _cmd_drag_joint(self, conn, payload):
        robot = self._field(payload, "robot", str, "a robot id")
        joint = self._field(payload, "joint", int, "a joint index")
        target = self._field(payload, "target", (int, float), "a number")
        self.workspace.drag_joint(robot, joint, float(target))
        return {}

    def _pose_from_payload(self, payload, robot_id):
        position = self._vector(payload, "position", 3)
        if "orientation" in payload and payload["orientation"] is not None:
            quat = self._vector(payload, "orientation", 4)
            return Pose(position, quat)
        if "rpy" in payload and payload["rpy"] is not None:
            return Pose.from_xyz_rpy(position, self._vector(payload, "rpy", 3))
        robot = self.workspace._robot(robot_id)
        current = Pose.from_matrix(robot.ee_tf())
        return Pose(position, current.orientation)

    def _cmd_drag_ee(self, conn, payload):
        robot = self._field(payload, "robot", str, "a robot id")
        target = self._pose_from_payload(payload, robot)
        result = self.workspace.drag_ee(robot, target)
        return {"q": [float(v) for v in result.q], "residual": result.residual,
                "iterations": result.iterations, "converged": result.converged}

    def _cmd_commit_ghost(self, conn, payload):
        robot = self._field(payload, "robot", str, "a robot id")
        return {"handle": self.workspace.commit_ghost(robot)}

    def _cmd_set_gripper(self, conn, payload):
        robot = self._field(payload, "robot", str, "a robot id")
        state = self._field(payload, "state", str, "open or closed")
        self.workspace.set_gripper(robot, state)
        return {}

    def _cmd_run_program(self, conn, payload):
        robot = self._field(payload, "robot", str, "a robot id")
        program = payload.get("program")
        if not isinstance(program, list) or not program:
            raise ValidationError("'program' must be a non-empty list")
        instructions = [instruction_from_dict(obj) for obj in program]
        return {"handle": self.workspace.run_program(robot, instructions)}

    def _cmd_record_start(self, conn, payload):
        robot = self._field(payload, "robot", str, "a robot id")
        sample_every = payload.get("sample_every", 10)
        if not isinstance(sample_every, int) or isinstance(sample_every, bool):
            raise ValidationError("'sample_every' must be an integer")
        self.workspace.start_recording(robot, sample_every)
        return {}

    def _cmd_record_stop(self, conn, payload):
        robot = self._field(payload, "robot", str, "a robot id")
        traj = self.workspace.stop_recording(robot)
        self._traj_counter += 1
        traj_id = f"t-{self._traj_counter:04d}"
        self.trajectories[traj_id] = traj
        traj_mod.save(traj, self._traj_path(traj_id))
        return {"trajectory_id": traj_id, "samples": len(traj),
                "duration": traj.duration}

    def _traj_path(self, traj_id):
        os.makedirs(self.data_dir, exist_ok=True)
        return os.path.join(self.data_dir, f"{traj_id}.traj.jsonl")

    def _model_path(self, model_id):
        os.makedirs(self.data_dir, exist_ok=True)
        return os.path.join(self.data_dir, f"{model_id}.dmp.json")

    def _get_trajectory(self, traj_id):
        if traj_id not in self.trajectories:
            raise ValidationError(f"unknown trajectory id {traj_id!r}")
        return self.trajectories[traj_id]

    def _get_model(self, model_id):
        if model_id not in self.models:
            raise ValidationError(f"unknown model id {model_id!r}")
        return self.models[model_id]

    def _cmd_train_dmp(self, conn, payload):
        traj_id = self._field(payload, "trajectory_id", str, "a trajectory id")
        traj = self._get_trajectory(traj_id)
        config_payload = payload.get("config") or {}
        if not isinstance(config_payload, dict):
            raise ValidationError("'config' must be an object")
        allowed = {"stiffness", "damping", "alpha", "n_basis", "dt", "regularization"}
        unknown = set(config_payload) - allowed
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        try:
            config = dmp_mod.DmpConfig(**config_payload)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad config: {exc}") from None
        model = dmp_mod.train(traj, config)
        self._model_counter += 1
        model_id = f"m-{self._model_counter:04d}"
        self.models[model_id] = model
        dmp_mod.save_model(model, self._model_path(model_id))
        return {"model_id": model_id, "dof": model.dof, "tau": model.tau}

    def _cmd_rollout_dmp(self, conn, payload):
        model_id = self._field(payload, "model_id", str, "a model id")
        model = self._get_model(model_id)
        goal = self._vector(payload, "goal", model.dof)
        start = self._vector(payload, "start", model.dof, required=False)
        tau = payload.get("tau")
        if tau is not None and (not isinstance(tau, (int, float)) or tau <= 0):
            raise ValidationError("'tau' must be a positive number")
        robot_id = payload.get("robot")
        if robot_id is not None and not isinstance(robot_id, str):
            raise ValidationError("'robot' must be a robot id")
        if start is None and robot_id is not None:
            start = [float(v) for v in self.workspace._robot(robot_id).q]
        traj = dmp_mod.rollout(model, x0=start, goal=goal,
                               tau=None if tau is None else float(tau))
        self._traj_counter += 1
        traj_id = f"t-{self._traj_counter:04d}"
        self.trajectories[traj_id] = traj
        traj_mod.save(traj, self._traj_path(traj_id))
        result = {"trajectory_id": traj_id, "duration": traj.duration}
        if robot_id is not None:
            result["handle"] = self.workspace.play_trajectory(robot_id, traj)
        return result

    def _cmd_save_trajectory(self, conn, payload):
        traj_id = self._field(payload, "trajectory_id", str, "a trajectory id")
        traj_mod.save(self._get_trajectory(traj_id), self._traj_path(traj_id))
        return {"path": self._traj_path(traj_id)}

    def _cmd_load_trajectory(self, conn, payload):
        traj_id = self._field(payload, "trajectory_id", str, "a trajectory id")
        path = self._traj_path(traj_id)
        if not os.path.exists(path):
            raise ValidationError(f"no stored trajectory {traj_id!r}")
        self.trajectories[traj_id] = traj_mod.load(path)
        return {"trajectory_id": traj_id, "samples": len(self.trajectories[traj_id])}

    def _cmd_save_model(self, conn, payload):
        model_id = self._field(payload, "model_id", str, "a model id")
        dmp_mod.save_model(self._get_model(model_id), self._model_path(model_id))
        return {"path": self._model_path(model_id)}

    def _cmd_load_model(self, conn, payload):
        model_id = self._field(payload, "model_id", str, "a model id")
        path = self._model_path(model_id)
        if not os.path.exists(path):
            raise ValidationError(f"no stored model {model_id!r}")
        self.models[model_id] = dmp_mod.load_model(path)
        return {"model_id": model_id, "dof": self.models[model_id].dof}


async def serve(workspace: Workspace, addr: str | None = None,
                data_dir: str | None = None,
                broadcast_hz: float = DEFAULT_BROADCAST_HZ,
                speed: float = 1.0) -> WorkbenchService:
    """Start the service and return it; callers own the event loop."""
    host, port = resolve_addr(addr)
    service = WorkbenchService(workspace, data_dir=data_dir,
                               broadcast_hz=broadcast_hz, speed=speed)
    await service.start(host, port)
    return service
