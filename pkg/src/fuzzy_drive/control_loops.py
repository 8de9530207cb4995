"""Heading regulation and waypoint tracking built on the fuzzy PD controller.

All controller-facing angles are in degrees.  Every step function is pure: it
takes the previous state value and returns a new one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Tuple

from .fuzzy_core import FuzzyPdConfig, fuzzy_pd

MAX_POWER = 100.0


@dataclass(frozen=True)
class Pose:
    """Planar pose.  ``theta`` is an unwrapped heading in degrees, CCW positive."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.theta)):
            raise ValueError(f"pose components must be finite, got {self!r}")

    @property
    def theta_wrapped(self) -> float:
        """Heading reduced to [0, 360)."""
        return self.theta % 360.0


@dataclass(frozen=True)
class RobotParams:
    """Differential-drive geometry; defaults are the LEGO NXT rover values.

    Attributes:
        b: Axle (back shaft) length in meters.
        c: Wheel radius in meters.
        PER: Wheel perimeter in meters, used by odometry.
        ticks_per_rev: Encoder counts per wheel revolution.
    """

    b: float = 0.094
    c: float = 0.028
    PER: float = 0.179
    ticks_per_rev: int = 360

    def __post_init__(self):
        if not (self.b > 0 and self.c > 0 and self.PER > 0):
            raise ValueError(f"b, c and PER must be positive, got {self!r}")
        if self.ticks_per_rev <= 0:
            raise ValueError("ticks_per_rev must be positive")
        nominal = 2.0 * math.pi * self.c
        if abs(self.PER - nominal) > 0.05 * nominal:
            warnings.warn(
                f"wheel perimeter {self.PER} differs from 2*pi*c = {nominal:.4f} by more than 5%",
                stacklevel=3,
            )


@dataclass(frozen=True)
class ControllerState:
    """Memory of the PD loop.

    ``prev_error`` is ``None`` until the first measurement; the first step then
    seeds it with the measured error so the initial rate is zero.
    """

    prev_error: Optional[float] = None
    step_index: int = 0


@dataclass(frozen=True)
class OdometryState:
    pose: Pose = Pose()
    prev_ticks_left: float = 0.0
    prev_ticks_right: float = 0.0


class MotorCommand(NamedTuple):
    power_left: float
    power_right: float


ZERO_COMMAND = MotorCommand(0.0, 0.0)


@dataclass(frozen=True)
class TrackingConfig:
    fuzzy: FuzzyPdConfig
    Kp: float
    waypoint: Tuple[float, float]
    goal_tolerance: float = 0.02
    heading_source: str = "odometry"

    def __post_init__(self):
        if not self.Kp > 0:
            raise ValueError(f"Kp must be positive, got {self.Kp!r}")
        if not self.goal_tolerance > 0:
            raise ValueError(f"goal_tolerance must be positive, got {self.goal_tolerance!r}")
        if self.heading_source not in ("odometry", "compass"):
            raise ValueError(f"heading_source must be 'odometry' or 'compass', got {self.heading_source!r}")


class StepInfo(NamedTuple):
    """Intermediate values of one control step, for logging."""

    error: float
    rate: float
    u: float
    R: Optional[float] = None


class OrientationResult(NamedTuple):
    command: MotorCommand
    state: ControllerState
    info: StepInfo


class TrackingResult(NamedTuple):
    command: MotorCommand
    state: ControllerState
    reached: bool
    info: StepInfo


def clamp_power(p: float) -> float:
    return min(MAX_POWER, max(-MAX_POWER, p))


def wrap_error(theta_ref: float, theta_actual: float) -> float:
    """Shortest signed rotation from ``theta_actual`` to ``theta_ref``, in (-180, 180]."""
    e = math.fmod(theta_ref - theta_actual, 360.0)
    if e > 180.0:
        e -= 360.0
    elif e <= -180.0:
        e += 360.0
    return e


def _pd_error_rate(state: ControllerState, error: float) -> Tuple[float, ControllerState]:
    prev = error if state.prev_error is None else state.prev_error
    return error - prev, ControllerState(prev_error=error, step_index=state.step_index + 1)


def orientation_step(
    state: ControllerState,
    theta_ref: float,
    theta_meas: float,
    cfg: FuzzyPdConfig,
    method: str = "closed_form",
) -> OrientationResult:
    """One iteration of the heading-regulation loop.

    The wheels spin in opposite directions with power ``u``: a positive
    output drives the left wheel forward and the right wheel backward.  The
    mapping is odd in the error, so negating the error negates the command.

    Returns:
        The clamped motor command, the next controller state, and the step's
        error, rate and output.
    """
    error = wrap_error(theta_ref, theta_meas)
    rate, new_state = _pd_error_rate(state, error)
    u = fuzzy_pd(error, rate, cfg, method)
    cmd = MotorCommand(clamp_power(u), clamp_power(-u))
    return OrientationResult(cmd, new_state, StepInfo(error, rate, u))


def odometry_update(
    state: OdometryState, ticks_left: float, ticks_right: float, params: RobotParams
) -> OdometryState:
    """Dead-reckon the pose from cumulative wheel tick counters (midpoint rule)."""
    per_tick = params.PER / params.ticks_per_rev
    dist_left = (ticks_left - state.prev_ticks_left) * per_tick
    dist_right = (ticks_right - state.prev_ticks_right) * per_tick
    dist_ave = (dist_right + dist_left) / 2.0
    dtheta = (dist_right - dist_left) / params.b

    heading = math.radians(state.pose.theta) + dtheta / 2.0
    pose = Pose(
        state.pose.x + dist_ave * math.cos(heading),
        state.pose.y + dist_ave * math.sin(heading),
        state.pose.theta + math.degrees(dtheta),
    )
    return OdometryState(pose, ticks_left, ticks_right)


def goal_geometry(pose: Pose, waypoint: Tuple[float, float]) -> Tuple[float, float]:
    """Bearing (degrees) and distance from ``pose`` to ``waypoint``.

    At zero distance the bearing is the current heading.
    """
    x_e = waypoint[0] - pose.x
    y_e = waypoint[1] - pose.y
    R = math.hypot(x_e, y_e)
    if R == 0.0:
        return pose.theta, 0.0
    return math.degrees(math.atan2(y_e, x_e)), R


def soft_saturate(w: float) -> float:
    """Odd exponential squashing of a wheel speed into (-1, 1)."""
    return math.copysign(1.0 - math.exp(-0.8 * abs(w)), w)


def wheel_speeds(v: float, omega: float, params: RobotParams) -> Tuple[float, float]:
    """Left and right wheel angular velocities (rad/s) for body velocities ``v``, ``omega``."""
    half_axle = params.b / 2.0
    w_left = (v - omega * half_axle) / params.c
    w_right = (v + omega * half_axle) / params.c
    return w_left, w_right


def tracking_step(
    ctrl: ControllerState,
    odo: OdometryState,
    cfg: TrackingConfig,
    params: RobotParams,
    heading_meas: float,
    method: str = "closed_form",
) -> TrackingResult:
    """One iteration of the waypoint-tracking loop.

    The fuzzy output steers (read as degrees/s and converted to rad/s) while
    the distance to the goal sets the forward speed through ``Kp``.

    Returns:
        Motor command, next controller state, whether the waypoint is reached,
        and the step's logged values.
    """
    theta_ref, R = goal_geometry(odo.pose, cfg.waypoint)
    if R < cfg.goal_tolerance:
        prev = ctrl.prev_error if ctrl.prev_error is not None else 0.0
        info = StepInfo(wrap_error(theta_ref, heading_meas), 0.0, 0.0, R)
        return TrackingResult(ZERO_COMMAND, replace(ctrl, prev_error=prev, step_index=ctrl.step_index + 1), True, info)

    L = cfg.fuzzy.L
    error = wrap_error(theta_ref, heading_meas)
    rate, new_ctrl = _pd_error_rate(ctrl, error)
    u = min(L, max(-L, fuzzy_pd(error, rate, cfg.fuzzy, method)))

    v = R * cfg.Kp
    w_left, w_right = wheel_speeds(v, math.radians(u), params)
    cmd = MotorCommand(
        clamp_power(MAX_POWER * soft_saturate(w_left)),
        clamp_power(MAX_POWER * soft_saturate(w_right)),
    )
    return TrackingResult(cmd, new_ctrl, False, StepInfo(error, rate, u, R))
