"""Headless virtual robot teaching workbench.

Parse URDF manipulators, simulate drive-based joints at a fixed 1 kHz step,
demonstrate motions through free-drive / ghost-drive interaction, record and
replay trajectories, and train dynamic movement primitives that generalize
demonstrations to new goals. A WebSocket server streams live state to
clients; the CLI covers every capability headlessly.
"""
from .dmp import DmpConfig, DmpModel, rollout, train
from .drives import DriveParams, JointMotionState, drive_effect, step
from .kinematics import (
    IkResult,
    forward_kinematics,
    interpolate_joint_path,
    jacobian,
    joint_transform,
    solve_ik,
)
from .trajectory import Trajectory, TrajectoryRecorder, TrajectorySample
from .transforms import Pose
from .urdf import JointChain, RobotModel, build_chain, parse_urdf, serialize_urdf
from .workspace import Workspace, load_scene

__version__ = "0.1.0"

__all__ = [
    "DmpConfig", "DmpModel", "rollout", "train",
    "DriveParams", "JointMotionState", "drive_effect", "step",
    "IkResult", "forward_kinematics", "interpolate_joint_path", "jacobian",
    "joint_transform", "solve_ik",
    "Trajectory", "TrajectoryRecorder", "TrajectorySample",
    "Pose", "JointChain", "RobotModel", "build_chain", "parse_urdf",
    "serialize_urdf", "Workspace", "load_scene",
]
