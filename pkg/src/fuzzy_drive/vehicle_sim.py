"""Kinematic differential-drive plant with simulated encoders and compass.

The plant integrates unicycle kinematics exactly over each period (constant
wheel speeds trace a circular arc), so any pose error seen by odometry comes
from the odometry formulas and the encoder quantisation, not the integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .control_loops import MAX_POWER, MotorCommand, Pose, RobotParams

# Below this yaw rate (rad/s) the straight-line formula replaces the arc.
_STRAIGHT_YAW_RATE = 1e-9


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    Attributes:
        dt: Control and simulation period, seconds.
        max_wheel_speed: Wheel angular speed at full power, rad/s.
        encoder_noise: Std-dev of additive encoder noise, ticks.
        compass_noise: Std-dev of additive compass noise, degrees.
        rng_seed: Seed for the noise generator.
    """

    dt: float = 0.02
    max_wheel_speed: float = 12.0
    encoder_noise: float = 0.0
    compass_noise: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.max_wheel_speed > 0:
            raise ValueError(f"max_wheel_speed must be positive, got {self.max_wheel_speed!r}")
        if self.encoder_noise < 0 or self.compass_noise < 0:
            raise ValueError("noise standard deviations must be non-negative")


@dataclass(frozen=True)
class PlantState:
    """Ground-truth robot state.

    Tick accumulators are real-valued wheel rotations in degrees; sensors
    quantise them on read.  ``rng`` is only consulted when noise is enabled.
    """

    pose: Pose = Pose()
    cum_ticks_left: float = 0.0
    cum_ticks_right: float = 0.0
    rng: Optional[np.random.Generator] = field(default=None, compare=False, repr=False)

    @classmethod
    def initial(cls, pose: Pose = Pose(), sim: Optional[SimConfig] = None) -> "PlantState":
        seed = 0 if sim is None else sim.rng_seed
        return cls(pose, 0.0, 0.0, np.random.default_rng(seed))


def _check_command(cmd: MotorCommand) -> None:
    for p in cmd:
        if not (math.isfinite(p) and -MAX_POWER <= p <= MAX_POWER):
            raise ValueError(f"motor power must lie in [-100, 100], got {tuple(cmd)!r}")


def arc_advance(pose: Pose, v: float, yaw_rate: float, duration: float) -> Pose:
    """Exact pose after moving at constant ``v`` (m/s) and ``yaw_rate`` (rad/s)."""
    th0 = math.radians(pose.theta)
    dth = yaw_rate * duration
    if abs(yaw_rate) < _STRAIGHT_YAW_RATE:
        dx = v * duration * math.cos(th0)
        dy = v * duration * math.sin(th0)
    else:
        radius = v / yaw_rate
        dx = radius * (math.sin(th0 + dth) - math.sin(th0))
        dy = -radius * (math.cos(th0 + dth) - math.cos(th0))
    return Pose(pose.x + dx, pose.y + dy, pose.theta + math.degrees(dth))


def body_velocities(cmd: MotorCommand, params: RobotParams, sim: SimConfig) -> Tuple[float, float, float, float]:
    """Wheel speeds and resulting body velocities for a power command.

    Returns:
        ``(omega_left, omega_right, v, yaw_rate)`` in rad/s, rad/s, m/s, rad/s.
    """
    w_left = cmd.power_left / MAX_POWER * sim.max_wheel_speed
    w_right = cmd.power_right / MAX_POWER * sim.max_wheel_speed
    v = params.c * (w_right + w_left) / 2.0
    yaw_rate = params.c * (w_right - w_left) / params.b
    return w_left, w_right, v, yaw_rate


def plant_step(state: PlantState, cmd: MotorCommand, params: RobotParams, sim: SimConfig) -> PlantState:
    """Advance the robot by one period ``sim.dt`` under a constant command.

    Raises:
        ValueError: if a power lies outside [-100, 100].
    """
    _check_command(cmd)
    if cmd.power_left == 0.0 and cmd.power_right == 0.0:
        return state
    w_left, w_right, v, yaw_rate = body_velocities(cmd, params, sim)
    to_deg = sim.dt * 180.0 / math.pi
    return PlantState(
        arc_advance(state.pose, v, yaw_rate, sim.dt),
        state.cum_ticks_left + w_left * to_deg,
        state.cum_ticks_right + w_right * to_deg,
        state.rng,
    )


def _round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def _noise(state: PlantState, std: float) -> float:
    if std == 0.0:
        return 0.0
    if state.rng is None:
        raise ValueError("noise requested but the plant state carries no generator; use PlantState.initial")
    return float(state.rng.normal(0.0, std))


def compass_read(state: PlantState, sim: SimConfig, clockwise: bool = False) -> int:
    """Heading to the nearest degree, reduced into 0..359.

    With ``clockwise=True`` the reading is a magnetic-style bearing that grows
    as the robot turns clockwise, i.e. the negated plant heading.
    """
    heading = state.pose.theta + _noise(state, sim.compass_noise)
    if clockwise:
        heading = -heading
    return _round_half_away(heading) % 360


def encoder_read(state: PlantState, sim: SimConfig) -> Tuple[int, int]:
    """Cumulative wheel rotations in whole degrees (left, right)."""
    left = state.cum_ticks_left + _noise(state, sim.encoder_noise)
    right = state.cum_ticks_right + _noise(state, sim.encoder_noise)
    return _round_half_away(left), _round_half_away(right)
