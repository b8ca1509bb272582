"""Forward kinematics, geometric Jacobian, damped-least-squares inverse
kinematics, and joint-space interpolation over a JointChain."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, Unreachable, ZeroVelocityLimit
from .trajectory import Trajectory
from .transforms import (
    Pose,
    axis_angle_matrix,
    make_tf,
    rotation_vector_between,
    rpy_matrix,
)
from .urdf import Joint, JointChain


@dataclass(frozen=True)
class IkResult:
    q: np.ndarray
    residual: float
    iterations: int
    converged: bool


@lru_cache(maxsize=None)
def _origin_tf(joint: Joint) -> np.ndarray:
    tf = make_tf(rpy_matrix(*joint.rpy), joint.xyz)
    tf.setflags(write=False)
    return tf


def _motion_tf(joint: Joint, qi: float) -> np.ndarray:
    if joint.kind in ("revolute", "continuous"):
        return make_tf(axis_angle_matrix(np.asarray(joint.axis), qi), (0.0, 0.0, 0.0))
    if joint.kind == "prismatic":
        return make_tf(np.eye(3), np.asarray(joint.axis) * qi)
    return np.eye(4)


def joint_transform(joint: Joint, qi: float = 0.0) -> Pose:
    """Child-frame pose relative to the parent link for joint value qi.

    Fixed joints ignore qi; revolute/continuous rotate about the joint axis,
    prismatic translates along it. The joint origin transform applies first.
    """
    return Pose.from_matrix(_origin_tf(joint) @ _motion_tf(joint, qi))


def _check_q(chain: JointChain, q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(-1)
    if len(q) != chain.dof:
        raise DimensionMismatch(f"chain has {chain.dof} DOFs, got {len(q)} values")
    return q


def fk_matrices(chain: JointChain, q) -> list:
    """Cumulative 4x4 link transforms, base frame first (identity)."""
    q = _check_q(chain, q)
    tf = np.eye(4)
    out = [tf]
    qi = iter(q)
    for joint in chain.joints:
        motion = _motion_tf(joint, next(qi)) if joint.actuated else np.eye(4)
        tf = tf @ _origin_tf(joint) @ motion
        out.append(tf)
    return out


def forward_kinematics(chain: JointChain, q):
    """End-effector pose and per-link poses (base -> tip) at configuration q."""
    mats = fk_matrices(chain, q)
    poses = [Pose.from_matrix(m) for m in mats]
    return poses[-1], poses


def jacobian(chain: JointChain, q) -> np.ndarray:
    """Geometric Jacobian at q: rows are linear xyz then angular xyz."""
    q = _check_q(chain, q)
    tf = np.eye(4)
    axes, points, kinds = [], [], []
    qi = iter(q)
    for joint in chain.joints:
        frame = tf @ _origin_tf(joint)
        if joint.actuated:
            axes.append(frame[:3, :3] @ np.asarray(joint.axis))
            points.append(frame[:3, 3].copy())
            kinds.append(joint.kind)
            tf = frame @ _motion_tf(joint, next(qi))
        else:
            tf = frame
    p_ee = tf[:3, 3]

    jac = np.zeros((6, chain.dof))
    for i, (axis, point, kind) in enumerate(zip(axes, points, kinds)):
        if kind == "prismatic":
            jac[:3, i] = axis
        else:
            jac[:3, i] = np.cross(axis, p_ee - point)
            jac[3:, i] = axis
    return jac


def pose_error(current_tf: np.ndarray, target: Pose):
    """(position delta, rotation vector) taking the current pose to the target."""
    dp = target.position - current_tf[:3, 3]
    dw = rotation_vector_between(current_tf[:3, :3], target.to_matrix()[:3, :3])
    return dp, dw


def solve_ik(chain: JointChain, target: Pose, q0, max_iter: int = 200,
             tol: float = 1e-4, damping: float = 0.05,
             orientation_weight: float = 0.5, step_limit: float = 0.3) -> IkResult:
    """Damped least squares with joint-limit clamping.

    The scalar residual is position error (m) plus orientation_weight times
    the remaining rotation angle (rad); convergence means residual <= tol.
    Raises Unreachable when max_iter runs out; the error carries the best
    attempt so callers can inspect the residual.
    """
    q = _check_q(chain, q0)
    lower, upper, _ = chain.limit_arrays()
    q = np.clip(q, lower, upper)
    w = orientation_weight

    best_q, best_res = q.copy(), np.inf
    for it in range(max_iter + 1):
        mats = fk_matrices(chain, q)
        dp, dw = pose_error(mats[-1], target)
        residual = float(np.linalg.norm(dp) + w * np.linalg.norm(dw))
        if residual < best_res:
            best_q, best_res = q.copy(), residual
        if residual <= tol:
            return IkResult(q=q, residual=residual, iterations=it, converged=True)
        if it == max_iter:
            break

        jac = jacobian(chain, q)
        jac_w = jac.copy()
        jac_w[3:] *= w
        err = np.concatenate([dp, w * dw])
        gram = jac_w @ jac_w.T + (damping * damping) * np.eye(6)
        dq = jac_w.T @ np.linalg.solve(gram, err)
        peak = np.max(np.abs(dq)) if dq.size else 0.0
        if peak > step_limit:
            dq *= step_limit / peak
        q = np.clip(q + dq, lower, upper)

    raise Unreachable(
        f"IK did not converge in {max_iter} iterations (best residual {best_res:.4g})",
        result=IkResult(q=best_q, residual=best_res, iterations=max_iter, converged=False))


def interpolate_joint_path(q_from, q_to, velocity_limits, dt: float,
                           joint_names=()) -> Trajectory:
    """Straight-line joint-space path timed by the slowest joint.

    Duration is max_j |dq_j| / velocity_limit_j; every joint moves at
    constant rate, so no joint ever exceeds its velocity limit.
    """
    q_from = np.asarray(q_from, dtype=float).reshape(-1)
    q_to = np.asarray(q_to, dtype=float).reshape(-1)
    vel = np.asarray(velocity_limits, dtype=float).reshape(-1)
    if len(q_from) != len(q_to) or len(q_from) != len(vel):
        raise DimensionMismatch("q_from, q_to and velocity limits must align")
    if dt <= 0:
        raise ValueError("dt must be positive")
    delta = q_to - q_from
    moving = np.abs(delta) > 0
    if np.any(vel[moving] <= 0):
        raise ZeroVelocityLimit("a moving joint has a non-positive velocity limit")

    duration = float(np.max(np.abs(delta[moving]) / vel[moving])) if moving.any() else 0.0
    if duration == 0.0:
        return Trajectory.from_arrays([0.0], q_to.reshape(1, -1),
                                      velocities=np.zeros((1, len(q_to))),
                                      joint_names=joint_names)

    m = int(np.floor(duration / dt + 1e-9))
    times = [k * dt for k in range(m + 1)]
    if duration - times[-1] > 1e-9 * max(1.0, duration):
        times.append(duration)
    else:
        times[-1] = duration
    times = np.array(times)

    positions = q_from[None, :] + (times / duration)[:, None] * delta[None, :]
    positions[0] = q_from
    positions[-1] = q_to
    rate = delta / duration
    velocities = np.tile(rate, (len(times), 1))
    return Trajectory.from_arrays(times, positions, velocities=velocities,
                                  joint_names=joint_names)
