"""Per-joint drive law and fixed-step integrator.

Each actuated joint is pulled toward its drive targets by
``effect = stiffness * (target_position - position)
         + damping * (target_velocity - velocity)``
clamped to +-force_limit. No gravity, no link coupling: one scalar inertia
per joint, semi-implicit Euler stepping. Defaults are critically damped at
unit inertia (damping = 2 * sqrt(stiffness)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonFiniteState

DEFAULT_STIFFNESS = 100.0
DEFAULT_DAMPING = 20.0
DEFAULT_FORCE_LIMIT = 1000.0


@dataclass
class DriveParams:
    stiffness: float = DEFAULT_STIFFNESS
    damping: float = DEFAULT_DAMPING
    force_limit: float = DEFAULT_FORCE_LIMIT
    target_position: float = 0.0
    target_velocity: float = 0.0
    inertia: float = 1.0

    def __post_init__(self):
        if self.stiffness < 0 or self.damping < 0 or self.force_limit < 0:
            raise ValueError("stiffness, damping and force_limit must be >= 0")
        if not self.inertia > 0:
            raise ValueError("inertia must be positive")


@dataclass(frozen=True)
class JointMotionState:
    position: float = 0.0
    velocity: float = 0.0


def drive_effect(params: DriveParams, state: JointMotionState) -> float:
    """Force or torque the drive applies at the current state."""
    effect = (params.stiffness * (params.target_position - state.position)
              + params.damping * (params.target_velocity - state.velocity))
    return max(-params.force_limit, min(params.force_limit, effect))


def step(state: JointMotionState, params: DriveParams, dt: float) -> JointMotionState:
    """Advance one semi-implicit Euler step: velocity first, then position."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    accel = drive_effect(params, state) / params.inertia
    velocity = state.velocity + accel * dt
    position = state.position + velocity * dt
    if not (math.isfinite(position) and math.isfinite(velocity)):
        raise NonFiniteState(
            f"joint state became non-finite (p={position}, v={velocity})")
    return JointMotionState(position=position, velocity=velocity)
