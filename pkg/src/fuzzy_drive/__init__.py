"""Minimal four-rule fuzzy PD controller and differential-drive experiments."""

from .control_loops import (
    ControllerState,
    MotorCommand,
    OdometryState,
    Pose,
    RobotParams,
    TrackingConfig,
    goal_geometry,
    odometry_update,
    orientation_step,
    soft_saturate,
    tracking_step,
    wrap_error,
)
from .fuzzy_core import (
    DegenerateInferenceError,
    FuzzyPdConfig,
    Region,
    RegionGroup,
    ScaledInputs,
    centroid_defuzz,
    classify_region,
    closed_form,
    fuzzy_pd,
    membership_vector,
    oracle_output,
    rule_strengths,
)
from .vehicle_sim import PlantState, SimConfig, compass_read, encoder_read, plant_step

__version__ = "0.1.0"
