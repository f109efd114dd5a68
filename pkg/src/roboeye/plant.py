"""Tendon-driven eyeball plant: gaze <-> tendon <-> servo mappings and a
rate-limited first-order servo surrogate.

One servo drives each agonist-antagonist cord pair through a bobbin, so the
transmission is a single ratio: eyeball_radius / bobbin_radius (3.75 with
defaults). The cord wrap over the sphere is modeled with a constant moment
arm, excursion = R * theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class EyeGeometry:
    eyeball_radius_mm: float = 30.0
    attachment_angle_deg: float = 55.0  # cord attachment cone; kept for extensions
    bobbin_radius_mm: float = 8.0
    gaze_limit_pan_deg: float = 30.0
    gaze_limit_tilt_deg: float = 30.0
    interocular_distance_mm: float = 70.0

    def __post_init__(self):
        if self.eyeball_radius_mm <= 0 or self.bobbin_radius_mm <= 0:
            raise ValueError("radii must be positive")
        if not 0 < self.attachment_angle_deg < 90:
            raise ValueError("attachment angle must be in (0, 90) deg")
        if self.gaze_limit_pan_deg <= 0 or self.gaze_limit_tilt_deg <= 0:
            raise ValueError("gaze limits must be positive")
        if self.bobbin_radius_mm >= self.eyeball_radius_mm:
            raise ValueError("bobbin radius must be smaller than eyeball radius")
        if self.interocular_distance_mm <= 0:
            raise ValueError("interocular distance must be positive")

    @property
    def transmission_ratio(self) -> float:
        return self.eyeball_radius_mm / self.bobbin_radius_mm


@dataclass(frozen=True)
class GazeState:
    """Gaze angles in radians. pan > 0 is leftward (robot's view), tilt > 0 is up."""

    pan: float = 0.0
    tilt: float = 0.0


@dataclass(frozen=True)
class TendonExcursion:
    """Signed cord excursion in mm; positive means the agonist side shortens.

    The antagonist excursion is the negation (single cord on a single bobbin).
    """

    horizontal_mm: float
    vertical_mm: float


@dataclass(frozen=True)
class ServoModel:
    max_speed_deg_s: float = 684.0
    time_constant_s: float = 0.020

    def __post_init__(self):
        if self.max_speed_deg_s <= 0:
            raise ValueError("max_speed must be positive")
        if self.time_constant_s <= 0:
            raise ValueError("time_constant must be positive")


@dataclass(frozen=True)
class ServoState:
    position_deg: float = 0.0
    goal_deg: float = 0.0


def _check_in_range(geom: EyeGeometry, gaze: GazeState) -> None:
    if abs(math.degrees(gaze.pan)) > geom.gaze_limit_pan_deg + 1e-12:
        raise ValueError(f"pan {math.degrees(gaze.pan):.3f} deg exceeds limit "
                         f"{geom.gaze_limit_pan_deg} deg")
    if abs(math.degrees(gaze.tilt)) > geom.gaze_limit_tilt_deg + 1e-12:
        raise ValueError(f"tilt {math.degrees(gaze.tilt):.3f} deg exceeds limit "
                         f"{geom.gaze_limit_tilt_deg} deg")


def tendon_excursion(geom: EyeGeometry, gaze: GazeState) -> TendonExcursion:
    """Cord excursion for a gaze rotation, constant-moment-arm model."""
    _check_in_range(geom, gaze)
    return TendonExcursion(
        horizontal_mm=geom.eyeball_radius_mm * gaze.pan,
        vertical_mm=geom.eyeball_radius_mm * gaze.tilt,
    )


def gaze_to_servo(geom: EyeGeometry, gaze: GazeState) -> tuple[float, float]:
    """Servo horn angles (deg) that realize a gaze through the bobbin."""
    exc = tendon_excursion(geom, gaze)
    return (
        math.degrees(exc.horizontal_mm / geom.bobbin_radius_mm),
        math.degrees(exc.vertical_mm / geom.bobbin_radius_mm),
    )


def servo_to_gaze(geom: EyeGeometry, servo_h_deg: float, servo_v_deg: float
                  ) -> tuple[GazeState, bool]:
    """Invert the transmission; out-of-range results are clamped and flagged."""
    gaze = GazeState(
        pan=math.radians(servo_h_deg) / geom.transmission_ratio,
        tilt=math.radians(servo_v_deg) / geom.transmission_ratio,
    )
    return clamp_gaze(geom, gaze)


def clamp_gaze(geom: EyeGeometry, gaze: GazeState) -> tuple[GazeState, bool]:
    lim_p = math.radians(geom.gaze_limit_pan_deg)
    lim_t = math.radians(geom.gaze_limit_tilt_deg)
    pan = min(max(gaze.pan, -lim_p), lim_p)
    tilt = min(max(gaze.tilt, -lim_t), lim_t)
    clamped = (pan != gaze.pan) or (tilt != gaze.tilt)
    return GazeState(pan=pan, tilt=tilt), clamped


def step_servo(model: ServoModel, state: ServoState, dt: float) -> ServoState:
    """First-order lag toward the goal, capped at the servo's slew rate."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    delta = (state.goal_deg - state.position_deg) * (1.0 - math.exp(-dt / model.time_constant_s))
    cap = model.max_speed_deg_s * dt
    if delta > cap:
        delta = cap
    elif delta < -cap:
        delta = -cap
    return replace(state, position_deg=state.position_deg + delta)
