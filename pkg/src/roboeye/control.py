"""Per-axis PID visual servo with anti-windup, movement-mode supervision, and
vestibulo-ocular feedforward.

The controller outputs gaze *rates* (rad/s); the sim integrates them into goal
angles. Visual feedback drives the eye toward a centered face; the VOR term
counter-rotates against measured head motion and stays active even when the
detector loses the face.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .plant import EyeGeometry


@dataclass(frozen=True)
class PidGains:
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0
    integral_limit: float = 1.0  # cap on |ki * integral|, rad/s
    output_limit: float = 6.0  # rad/s

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0 or self.kd < 0:
            raise ValueError("gains must be non-negative")
        if self.integral_limit <= 0 or self.output_limit <= 0:
            raise ValueError("limits must be positive")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0
    initialized: bool = False


def pid_step(gains: PidGains, state: PidState, error: float, dt: float
             ) -> tuple[float, PidState]:
    """One PID update. Derivative is suppressed on the first sample; the
    integral is clamped so its contribution never exceeds integral_limit."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    integral = state.integral + error * dt
    if gains.ki > 0:
        bound = gains.integral_limit / gains.ki
        integral = min(max(integral, -bound), bound)
    derivative = 0.0 if not state.initialized else (error - state.prev_error) / dt
    u = gains.kp * error + gains.ki * integral + gains.kd * derivative
    u = min(max(u, -gains.output_limit), gains.output_limit)
    return u, PidState(integral=integral, prev_error=error, initialized=True)


class MovementMode(enum.Enum):
    SACCADE = "saccade"
    SMOOTH_PURSUIT = "smooth_pursuit"
    FIXATION = "fixation"


@dataclass(frozen=True)
class SupervisorConfig:
    saccade_threshold: float = 0.30  # normalized image error
    fixation_threshold: float = 0.03
    vor_rate_threshold: float = 0.05  # rad/s
    vor_gain: float = 1.0
    saccade_rate: float = 6.0  # rad/s cap during saccades
    pursuit_gains: PidGains = field(default_factory=lambda: PidGains(
        kp=2.0, ki=2.0, kd=0.05, integral_limit=1.0, output_limit=2.0))
    saccade_gains: PidGains = field(default_factory=lambda: PidGains(
        kp=6.0, ki=0.0, kd=0.0, output_limit=6.0))

    def __post_init__(self):
        if not 0 < self.fixation_threshold < self.saccade_threshold:
            raise ValueError("need 0 < fixation_threshold < saccade_threshold")
        if self.saccade_rate <= 0 or self.vor_rate_threshold <= 0:
            raise ValueError("rates must be positive")

    def gains_for(self, mode: MovementMode) -> PidGains:
        if mode is MovementMode.SACCADE:
            return replace(self.saccade_gains,
                           output_limit=min(self.saccade_gains.output_limit,
                                            self.saccade_rate))
        return self.pursuit_gains


def classify_mode(error: tuple[float, float], head_rate: float,
                  cfg: SupervisorConfig) -> tuple[MovementMode, bool]:
    """Base movement mode from image error magnitude, plus the VOR flag."""
    mag = max(abs(error[0]), abs(error[1]))
    if mag > cfg.saccade_threshold:
        mode = MovementMode.SACCADE
    elif mag < cfg.fixation_threshold:
        mode = MovementMode.FIXATION
    else:
        mode = MovementMode.SMOOTH_PURSUIT
    return mode, abs(head_rate) > cfg.vor_rate_threshold


@dataclass
class EyeControllerState:
    mode: MovementMode = MovementMode.FIXATION
    vor_active: bool = False
    pan_pid: PidState = field(default_factory=PidState)
    tilt_pid: PidState = field(default_factory=PidState)


def gaze_command(cfg: SupervisorConfig, state: EyeControllerState,
                 error: tuple[float, float] | None,
                 head_rate: tuple[float, float], dt: float,
                 vor_enabled: bool = True) -> tuple[float, float]:
    """Gaze rate command (pan_rate, tilt_rate) for one eye; mutates `state`.

    error is None when the face was not detected: the visual term is zeroed
    and the integral frozen, but VOR feedforward keeps running.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    yaw_rate, pitch_rate = head_rate
    vor_drive = max(abs(yaw_rate), abs(pitch_rate))
    if error is not None:
        mode, vor_active = classify_mode(error, vor_drive, cfg)
        if mode is not state.mode:
            # fresh PID state across mode switches: no stale integral or
            # derivative kick with the new gains
            state.pan_pid = PidState()
            state.tilt_pid = PidState()
            state.mode = mode
        gains = cfg.gains_for(mode)
        # positive ex means the face sits to the camera's right: pan rightward
        # (negative pan rate); same inversion vertically
        u_pan, state.pan_pid = pid_step(gains, state.pan_pid, -error[0], dt)
        u_tilt, state.tilt_pid = pid_step(gains, state.tilt_pid, -error[1], dt)
        state.vor_active = vor_active
    else:
        state.vor_active = vor_drive > cfg.vor_rate_threshold
        u_pan = 0.0
        u_tilt = 0.0
    pan_rate, tilt_rate = u_pan, u_tilt
    if vor_enabled and state.vor_active:
        pan_rate = pan_rate - cfg.vor_gain * yaw_rate
        tilt_rate = tilt_rate - cfg.vor_gain * pitch_rate
    return pan_rate, tilt_rate


def vergence_reference(geom: EyeGeometry, distance_m: float) -> tuple[float, float]:
    """Ideal inward pan (rad) per eye for a midline target: (left, right).

    The left eye pans rightward (negative), the right eye leftward (positive);
    both converge toward the midline.
    """
    if distance_m <= 0:
        raise ValueError("distance must be positive")
    half_base_m = geom.interocular_distance_mm / 2000.0
    inward = math.atan(half_base_m / distance_m)
    return (-inward, inward)
