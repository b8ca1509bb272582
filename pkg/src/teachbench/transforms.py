"""Rigid-body poses and the small set of transform helpers the engine needs.

Quaternions are scalar-last ``[x, y, z, w]`` throughout, matching the wire
protocol. Internally most math runs on 4x4 homogeneous matrices; ``Pose`` is
the boundary representation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

IDENTITY_QUAT = np.array([0.0, 0.0, 0.0, 1.0])


@dataclass(frozen=True, eq=False)
class Pose:
    """Position (m) plus unit quaternion orientation."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=lambda: IDENTITY_QUAT.copy())

    def __eq__(self, other):
        if not isinstance(other, Pose):
            return NotImplemented
        return (np.array_equal(self.position, other.position)
                and np.array_equal(self.orientation, other.orientation))

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float).reshape(3)
        q = np.asarray(self.orientation, dtype=float).reshape(4)
        norm = float(np.linalg.norm(q))
        if not np.isfinite(p).all() or not np.isfinite(q).all() or norm < 1e-12:
            raise ValueError("pose requires finite position and a nonzero quaternion")
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "orientation", q / norm)

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_matrix(tf: np.ndarray) -> "Pose":
        return Pose(tf[:3, 3].copy(), Rotation.from_matrix(tf[:3, :3]).as_quat())

    @staticmethod
    def from_xyz_rpy(xyz, rpy) -> "Pose":
        return Pose(np.asarray(xyz, dtype=float),
                    Rotation.from_euler("xyz", rpy).as_quat())

    def to_matrix(self) -> np.ndarray:
        tf = np.eye(4)
        tf[:3, :3] = Rotation.from_quat(self.orientation).as_matrix()
        tf[:3, 3] = self.position
        return tf

    def compose(self, other: "Pose") -> "Pose":
        return Pose.from_matrix(self.to_matrix() @ other.to_matrix())

    def to_dict(self) -> dict:
        return {"position": [float(v) for v in self.position],
                "orientation": [float(v) for v in self.orientation]}

    @staticmethod
    def from_dict(d: dict) -> "Pose":
        return Pose(np.asarray(d["position"], dtype=float),
                    np.asarray(d["orientation"], dtype=float))


def rpy_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """URDF fixed-axis convention: Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    return Rotation.from_euler("xyz", [roll, pitch, yaw]).as_matrix()


def make_tf(rotation: np.ndarray, translation) -> np.ndarray:
    tf = np.eye(4)
    tf[:3, :3] = rotation
    tf[:3, 3] = translation
    return tf


def invert_tf(tf: np.ndarray) -> np.ndarray:
    rt = tf[:3, :3].T
    out = np.eye(4)
    out[:3, :3] = rt
    out[:3, 3] = -rt @ tf[:3, 3]
    return out


def axis_angle_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    one_c = 1.0 - c
    return np.array([
        [c + x * x * one_c, x * y * one_c - z * s, x * z * one_c + y * s],
        [y * x * one_c + z * s, c + y * y * one_c, y * z * one_c - x * s],
        [z * x * one_c - y * s, z * y * one_c + x * s, c + z * z * one_c],
    ])


def rotation_angle_between(qa: np.ndarray, qb: np.ndarray) -> float:
    """Angle of the relative rotation between two unit quaternions, in [0, pi]."""
    dot = abs(float(np.dot(qa, qb)))
    return 2.0 * np.arccos(min(1.0, dot))


def rotation_vector_between(r_from: np.ndarray, r_to: np.ndarray) -> np.ndarray:
    """Rotation vector (axis * angle) taking rotation matrix r_from to r_to."""
    return Rotation.from_matrix(r_to @ r_from.T).as_rotvec()
