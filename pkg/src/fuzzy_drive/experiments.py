"""Experiment configuration and the closed-loop harnesses.

A run is fully determined by its :class:`ExperimentConfig`, including the
noise seed.  Configs are JSON documents; unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from .control_loops import (
    ControllerState,
    OdometryState,
    Pose,
    RobotParams,
    TrackingConfig,
    odometry_update,
    orientation_step,
    tracking_step,
)
from .fuzzy_core import (
    GROUPS_BY_CODE,
    FuzzyPdConfig,
    RegionGroup,
    classify_group_array,
    classify_region,
    closed_form_array,
    oracle_output_array,
)
from .vehicle_sim import PlantState, SimConfig, compass_read, encoder_read, plant_step

SCHEMA_VERSION = 1
KINDS = ("orientation", "tracking", "verify")


class ConfigError(ValueError):
    """Invalid or unknown experiment configuration."""


@dataclass(frozen=True)
class OrientationSettings:
    theta_ref: float = 90.0
    theta_initial: float = 0.0
    iterations: int = 300


@dataclass(frozen=True)
class TrackingSettings:
    waypoints: Tuple[Tuple[float, float], ...] = ((1.0, 1.0),)
    Kp: float = 0.25
    goal_tolerance: float = 0.02
    heading_source: str = "odometry"
    start: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    max_steps: int = 5000


@dataclass(frozen=True)
class VerifySettings:
    grid_min: float = -900.0
    grid_max: float = 900.0
    samples_per_axis: int = 1001


@dataclass(frozen=True)
class OutputSettings:
    csv_path: Optional[str] = None
    plot_path: Optional[str] = None


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    fuzzy: FuzzyPdConfig
    robot: RobotParams = RobotParams()
    sim: SimConfig = SimConfig()
    orientation: OrientationSettings = OrientationSettings()
    tracking: TrackingSettings = TrackingSettings()
    verify: VerifySettings = VerifySettings()
    output: OutputSettings = OutputSettings()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.orientation.iterations <= 0:
            raise ConfigError("orientation.iterations must be positive")
        if not self.tracking.waypoints:
            raise ConfigError("tracking.waypoints must not be empty")
        if self.tracking.max_steps <= 0:
            raise ConfigError("tracking.max_steps must be positive")
        if self.verify.samples_per_axis < 1:
            raise ConfigError("verify.samples_per_axis must be positive")


# Defaults for the two experiments; gains are the published ones.
ORIENTATION_GAINS = FuzzyPdConfig(Ge=20.0, Gr=2.0, Gu=0.5, L=360.0)
TRACKING_GAINS = FuzzyPdConfig(Ge=4.7, Gr=0.025, Gu=1.01, L=360.0)


def default_config(kind: str) -> ExperimentConfig:
    fuzzy = TRACKING_GAINS if kind == "tracking" else ORIENTATION_GAINS
    return ExperimentConfig(kind=kind, fuzzy=fuzzy)


_SECTIONS = {
    "fuzzy": FuzzyPdConfig,
    "robot": RobotParams,
    "sim": SimConfig,
    "orientation": OrientationSettings,
    "tracking": TrackingSettings,
    "verify": VerifySettings,
    "output": OutputSettings,
}

_TUPLE_FIELDS = {("tracking", "waypoints"), ("tracking", "start")}


def _build_section(name: str, base: Any, raw: Any) -> Any:
    if not isinstance(raw, Mapping):
        raise ConfigError(f"section [{name}] must be a table, got {type(raw).__name__}")
    known = {f.name for f in dataclasses.fields(base)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(unknown)}")
    values = dict(raw)
    for key in values:
        if (name, key) in _TUPLE_FIELDS:
            if key == "waypoints":
                values[key] = tuple((float(x), float(y)) for x, y in values[key])
            else:
                values[key] = tuple(float(v) for v in values[key])
    try:
        return dataclasses.replace(base, **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [{name}] section: {exc}") from exc


def config_from_dict(data: Mapping[str, Any]) -> ExperimentConfig:
    """Build a config from a parsed document, layering it over the kind's defaults."""
    if data.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"config must declare schema = {SCHEMA_VERSION}, got {data.get('schema')!r}")
    unknown = sorted(set(data) - {"schema", "kind", *_SECTIONS})
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    kind = data.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
    cfg = default_config(kind)
    sections = {
        name: _build_section(name, getattr(cfg, name), data[name]) for name in _SECTIONS if name in data
    }
    try:
        return dataclasses.replace(cfg, **sections)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return config_from_dict(data)


def config_to_dict(cfg: ExperimentConfig) -> Dict[str, Any]:
    data: Dict[str, Any] = {"schema": SCHEMA_VERSION, "kind": cfg.kind}
    for name in _SECTIONS:
        data[name] = dataclasses.asdict(getattr(cfg, name))
    return data


# -- trajectory records -------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryRecord:
    """One control step.  ``R`` is ``None`` for orientation runs."""

    step: int
    t: float
    x: float
    y: float
    theta: float
    error: float
    rate: float
    u: float
    region: str
    power_left: float
    power_right: float
    R: Optional[float] = None


RECORD_FIELDS = tuple(f.name for f in dataclasses.fields(TrajectoryRecord))


@dataclass
class RunResult:
    records: List[TrajectoryRecord]
    converged: bool
    summary: Dict[str, Any] = field(default_factory=dict)


def _region_label(cfg: FuzzyPdConfig, error: float, rate: float) -> str:
    return classify_region(cfg.scale(error, rate), cfg.L).label


def run_orientation(cfg: ExperimentConfig) -> RunResult:
    """Heading regulation from ``theta_initial`` to ``theta_ref``.

    The rig reads its compass as a clockwise bearing, which is what makes a
    positive controller output (left wheel forward) reduce a positive error.
    Reference, initial heading, and the logged ``theta`` are bearings.
    """
    if cfg.kind != "orientation":
        raise ConfigError(f"run_orientation needs kind 'orientation', got {cfg.kind!r}")
    o = cfg.orientation
    plant = PlantState.initial(Pose(0.0, 0.0, -o.theta_initial), cfg.sim)
    ctrl = ControllerState()
    records = []
    for step in range(o.iterations):
        heading = compass_read(plant, cfg.sim, clockwise=True)
        cmd, ctrl, info = orientation_step(ctrl, o.theta_ref, heading, cfg.fuzzy)
        records.append(
            TrajectoryRecord(
                step=step,
                t=step * cfg.sim.dt,
                x=plant.pose.x,
                y=plant.pose.y,
                theta=-plant.pose.theta,
                error=info.error,
                rate=info.rate,
                u=info.u,
                region=_region_label(cfg.fuzzy, info.error, info.rate),
                power_left=cmd.power_left,
                power_right=cmd.power_right,
            )
        )
        plant = plant_step(plant, cmd, cfg.robot, cfg.sim)
    final_error = records[-1].error
    return RunResult(
        records,
        converged=abs(final_error) <= 2.0,
        summary={"final_error": final_error, "iterations": o.iterations},
    )


def run_tracking(cfg: ExperimentConfig) -> RunResult:
    """Drive through the waypoints in order using encoder odometry.

    Stops when the last waypoint is reached or after ``max_steps`` steps; in
    the latter case the result is marked as not converged.
    """
    if cfg.kind != "tracking":
        raise ConfigError(f"run_tracking needs kind 'tracking', got {cfg.kind!r}")
    tr = cfg.tracking
    start = Pose(*tr.start)
    plant = PlantState.initial(start, cfg.sim)
    odo = OdometryState(start, 0.0, 0.0)
    ctrl = ControllerState()
    targets = list(tr.waypoints)
    target = 0
    records = []
    reached_all = False
    for step in range(tr.max_steps):
        ticks_left, ticks_right = encoder_read(plant, cfg.sim)
        odo = odometry_update(odo, ticks_left, ticks_right, cfg.robot)
        if tr.heading_source == "compass":
            heading = float(compass_read(plant, cfg.sim))
        else:
            heading = odo.pose.theta
        track = TrackingConfig(cfg.fuzzy, tr.Kp, targets[target], tr.goal_tolerance, tr.heading_source)
        cmd, ctrl, reached, info = tracking_step(ctrl, odo, track, cfg.robot, heading)
        records.append(
            TrajectoryRecord(
                step=step,
                t=step * cfg.sim.dt,
                x=plant.pose.x,
                y=plant.pose.y,
                theta=plant.pose.theta,
                error=info.error,
                rate=info.rate,
                u=info.u,
                region=_region_label(cfg.fuzzy, info.error, info.rate),
                power_left=cmd.power_left,
                power_right=cmd.power_right,
                R=info.R,
            )
        )
        if reached:
            target += 1
            # fresh derivative memory for the next leg
            ctrl = ControllerState(step_index=ctrl.step_index)
            if target == len(targets):
                reached_all = True
                break
        plant = plant_step(plant, cmd, cfg.robot, cfg.sim)
    final = records[-1]
    return RunResult(
        records,
        converged=reached_all,
        summary={
            "steps": len(records),
            "waypoints_reached": target,
            "final_R": final.R,
            "final_x": final.x,
            "final_y": final.y,
        },
    )


# -- equivalence sweep --------------------------------------------------------


@dataclass
class VerifyReport:
    max_abs_diff: float
    argmax: Tuple[float, float]
    group_counts: Dict[str, int]
    L: float
    points: int

    @property
    def passed(self) -> bool:
        return self.max_abs_diff <= 1e-9 * self.L

    @property
    def groups_visited(self) -> int:
        return sum(1 for n in self.group_counts.values() if n > 0)


def run_verify(grid_min: float, grid_max: float, samples_per_axis: int, L: float) -> VerifyReport:
    """Compare the closed form with full inference on a square grid of scaled inputs.

    ``samples_per_axis == 1`` evaluates the single point ``(grid_min, grid_min)``.
    """
    if samples_per_axis < 1:
        raise ValueError("samples_per_axis must be positive")
    axis = np.linspace(grid_min, grid_max, samples_per_axis)
    e, r = np.meshgrid(axis, axis, indexing="ij")
    diff = np.abs(closed_form_array(e, r, L) - oracle_output_array(e, r, L))
    idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
    codes = classify_group_array(e, r, L)
    counts = np.bincount(codes.ravel(), minlength=len(GROUPS_BY_CODE))
    return VerifyReport(
        max_abs_diff=float(diff[idx]),
        argmax=(float(e[idx]), float(r[idx])),
        group_counts={g.value: int(n) for g, n in zip(GROUPS_BY_CODE, counts)},
        L=L,
        points=int(diff.size),
    )


def verify_from_config(cfg: ExperimentConfig) -> VerifyReport:
    v = cfg.verify
    return run_verify(v.grid_min, v.grid_max, v.samples_per_axis, cfg.fuzzy.L)


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "OrientationSettings",
    "TrackingSettings",
    "VerifySettings",
    "OutputSettings",
    "TrajectoryRecord",
    "RECORD_FIELDS",
    "RunResult",
    "VerifyReport",
    "RegionGroup",
    "default_config",
    "config_from_dict",
    "config_to_dict",
    "load_config",
    "run_orientation",
    "run_tracking",
    "run_verify",
    "verify_from_config",
    "ORIENTATION_GAINS",
    "TRACKING_GAINS",
]
