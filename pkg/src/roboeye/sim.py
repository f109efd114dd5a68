"""Deterministic fixed-step closed-loop engine: scripted target/head motion
-> synthetic vision -> PID/VOR control -> Protocol 2.0 sim bus -> servo plant.

Every command travels through the byte-level codec (sync-write down, register
reads back), so all four experiments exercise the wire path. Traces are
bit-reproducible for a given (scenario, config, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from . import plant, protocol
from .control import EyeControllerState, SupervisorConfig, gaze_command
from .plant import EyeGeometry, GazeState, ServoModel
from .protocol import (LoopbackTransport, ServoBusClient, SimBus, SimServo,
                       units_to_deg)
from .rng import SplitMix64
from .vision import (EYES, LEFT, RIGHT, CameraModel, FaceObservation,
                     FaceTarget, HeadPose, normalized_error, observe_face)

# servo horn angle for straight-ahead gaze; chosen on an exact position unit
# (512) so a zero command survives the deg<->units round trip unchanged
CENTER_UNITS = 512
CENTER_DEG = units_to_deg(CENTER_UNITS)

# wiring convention: (eye, axis) -> servo id
DEFAULT_SERVO_IDS = {(LEFT, "h"): 1, (LEFT, "v"): 2, (RIGHT, "h"): 3, (RIGHT, "v"): 4}


@dataclass(frozen=True)
class Scenario:
    name: str
    duration_s: float
    target: Callable[[float], FaceTarget]
    head: Callable[[float], HeadPose]
    initial_gaze: GazeState = GazeState()
    noise_std_px: float = 1.0
    seed: int = 0
    vor_disabled: bool = False

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValueError("duration must be positive")


@dataclass(frozen=True)
class SimConfig:
    control_rate_hz: float = 100.0
    camera_rate_hz: float = 30.0
    geometry: EyeGeometry = field(default_factory=EyeGeometry)
    servo_model: ServoModel = field(default_factory=ServoModel)
    camera: CameraModel = field(default_factory=CameraModel)
    supervisor: SupervisorConfig = field(default_factory=SupervisorConfig)

    def __post_init__(self):
        if self.control_rate_hz <= 0 or self.camera_rate_hz <= 0:
            raise ValueError("rates must be positive")
        if self.camera_rate_hz > self.control_rate_hz:
            raise ValueError("camera rate cannot exceed control rate")


@dataclass(frozen=True)
class TraceRecord:
    t: float
    eye: str
    u: float
    v: float
    valid: bool
    ex: float
    ey: float
    pan_deg: float
    tilt_deg: float
    servo_h_units: int
    servo_v_units: int
    mode: str
    vor_active: bool
    head_yaw: float
    head_pitch: float


CSV_HEADER = ("t,eye,u,v,valid,ex,ey,pan_deg,tilt_deg,servo_h_units,"
              "servo_v_units,mode,vor_active,head_yaw,head_pitch")


@dataclass(frozen=True)
class Trace:
    records: tuple[TraceRecord, ...]
    dt: float
    camera_width_px: int

    def per_eye(self, eye: str) -> list[TraceRecord]:
        return [r for r in self.records if r.eye == eye]

    def ticks(self) -> list[tuple[TraceRecord, TraceRecord]]:
        """(left, right) record pairs in time order."""
        left = self.per_eye(LEFT)
        right = self.per_eye(RIGHT)
        return list(zip(left, right))

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.records:
            lines.append(",".join([
                repr(r.t), r.eye, repr(r.u), repr(r.v), str(int(r.valid)),
                repr(r.ex), repr(r.ey), repr(r.pan_deg), repr(r.tilt_deg),
                str(r.servo_h_units), str(r.servo_v_units), r.mode,
                str(int(r.vor_active)), repr(r.head_yaw), repr(r.head_pitch),
            ]))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Metrics:
    settling_time_s: float | None
    steady_state_error: float
    rms_retinal_slip: float
    peak_error: float


# ---------------------------------------------------------------------------
# Scenario builders


def scenario_saccade(offset_frac: float = 0.9, range_m: float = 1.5,
                     duration_s: float = 5.0, noise_std_px: float = 1.0,
                     seed: int = 0, cam: CameraModel | None = None) -> Scenario:
    """Static face whose initial projection sits at offset_frac of the image
    half-width from center (seen from the midpoint between the eyes)."""
    if not 0 < offset_frac <= 1:
        raise ValueError("offset_frac must be in (0, 1]")
    cam = cam or CameraModel()
    x = offset_frac * (cam.width_px / 2) * range_m / cam.focal_px
    face = FaceTarget(position=(x, 0.0, range_m))
    return Scenario(name="saccade", duration_s=duration_s,
                    target=lambda t: face, head=lambda t: HeadPose(),
                    noise_std_px=noise_std_px, seed=seed)


def scenario_pursuit(freq_hz: float = 0.2, amp_deg: float = 15.0,
                     range_m: float = 1.5, duration_s: float = 15.0,
                     noise_std_px: float = 1.0, seed: int = 0,
                     geom: EyeGeometry | None = None) -> Scenario:
    """Face sweeping sinusoidally in azimuth (walking) and elevation (up/down)."""
    geom = geom or EyeGeometry()
    if amp_deg > min(geom.gaze_limit_pan_deg, geom.gaze_limit_tilt_deg):
        raise ValueError("pursuit amplitude exceeds gaze limits")
    amp = math.radians(amp_deg)
    omega = 2 * math.pi * freq_hz

    def target(t: float) -> FaceTarget:
        az = amp * math.sin(omega * t)
        el = amp * math.sin(omega * t)
        return FaceTarget(position=(
            range_m * math.sin(az) * math.cos(el),
            range_m * math.sin(el),
            range_m * math.cos(az) * math.cos(el),
        ))

    return Scenario(name="pursuit", duration_s=duration_s, target=target,
                    head=lambda t: HeadPose(), noise_std_px=noise_std_px,
                    seed=seed)


def scenario_vergence(z_start_m: float = 2.0, z_end_m: float = 0.3,
                      duration_s: float = 10.0, noise_std_px: float = 1.0,
                      seed: int = 0) -> Scenario:
    """Midline face approaching linearly from z_start to z_end."""
    if z_end_m <= 0 or z_start_m <= 0:
        raise ValueError("distances must be positive")

    def target(t: float) -> FaceTarget:
        z = z_start_m + (z_end_m - z_start_m) * min(t / duration_s, 1.0)
        return FaceTarget(position=(0.0, 0.0, z))

    return Scenario(name="vergence", duration_s=duration_s, target=target,
                    head=lambda t: HeadPose(), noise_std_px=noise_std_px,
                    seed=seed)


def scenario_vor(freq_hz: float = 0.5, amp_deg: float = 10.0,
                 range_m: float = 1.5, duration_s: float = 10.0,
                 noise_std_px: float = 1.0, seed: int = 0,
                 vor_disabled: bool = False) -> Scenario:
    """Static face while the head yaws sinusoidally; vor_disabled runs the
    visual-only baseline."""
    amp = math.radians(amp_deg)
    omega = 2 * math.pi * freq_hz
    face = FaceTarget(position=(0.0, 0.0, range_m))
    return Scenario(name="vor", duration_s=duration_s,
                    target=lambda t: face,
                    head=lambda t: HeadPose(yaw=amp * math.sin(omega * t)),
                    noise_std_px=noise_std_px, seed=seed,
                    vor_disabled=vor_disabled)


def scenario_equilibrium(duration_s: float = 2.0, seed: int = 0) -> Scenario:
    """Centered static target at optical infinity: the exact binocular
    equilibrium (both images centered with zero gaze)."""
    face = FaceTarget(position=(0.0, 0.0, math.inf))
    return Scenario(name="equilibrium", duration_s=duration_s,
                    target=lambda t: face, head=lambda t: HeadPose(),
                    noise_std_px=0.0, seed=seed)


SCENARIO_BUILDERS = {
    "saccade": scenario_saccade,
    "pursuit": scenario_pursuit,
    "vergence": scenario_vergence,
    "vor": scenario_vor,
}


# ---------------------------------------------------------------------------
# Engine


class Engine:
    """Single-loop steppable simulation. One step() per control tick."""

    def __init__(self, scenario: Scenario, cfg: SimConfig | None = None,
                 servo_ids: dict[tuple[str, str], int] | None = None):
        self.scenario = scenario
        self.cfg = cfg or SimConfig()
        self.servo_ids = dict(servo_ids or DEFAULT_SERVO_IDS)
        self.dt = 1.0 / self.cfg.control_rate_hz
        self.rng = SplitMix64(scenario.seed)

        geom = self.cfg.geometry
        g0, _ = plant.clamp_gaze(geom, scenario.initial_gaze)
        self.goal_gaze: dict[str, GazeState] = {e: g0 for e in EYES}
        self.true_gaze: dict[str, GazeState] = {e: g0 for e in EYES}

        servos = []
        for eye in EYES:
            h, v = plant.gaze_to_servo(geom, g0)
            servos.append(SimServo(self.servo_ids[(eye, "h")],
                                   model=self.cfg.servo_model,
                                   initial_deg=CENTER_DEG + h))
            servos.append(SimServo(self.servo_ids[(eye, "v")],
                                   model=self.cfg.servo_model,
                                   initial_deg=CENTER_DEG + v))
        self.bus = SimBus(servos)
        self.client = ServoBusClient(LoopbackTransport(self.bus))
        self.controllers = {e: EyeControllerState() for e in EYES}

        self.tick = 0
        self._next_camera_t = 0.0
        self._held_obs: dict[str, FaceObservation | None] = {e: None for e in EYES}
        self._prev_head = scenario.head(0.0)
        self._records: list[TraceRecord] = []
        # commanded gaze rates per tick, {eye: (pan_rate, tilt_rate)};
        # not part of the CSV schema, used for analysis and verification
        self.rate_log: list[dict[str, tuple[float, float]]] = []
        # live overrides for serve mode; None means follow the scenario script
        self.target_override: FaceTarget | None = None
        self.head_override: HeadPose | None = None

    @property
    def t(self) -> float:
        return self.tick * self.dt

    def _current_target(self, t: float) -> FaceTarget:
        return self.target_override or self.scenario.target(t)

    def _current_head(self, t: float) -> HeadPose:
        return self.head_override or self.scenario.head(t)

    def step(self) -> list[TraceRecord]:
        t = self.t
        cfg = self.cfg
        geom = cfg.geometry
        head = self._current_head(t)
        head_rate = ((head.yaw - self._prev_head.yaw) / self.dt,
                     (head.pitch - self._prev_head.pitch) / self.dt)
        self._prev_head = head

        # camera runs slower than control: sample on frame ticks, hold between
        if t + 1e-9 >= self._next_camera_t:
            target = self._current_target(t)
            for eye in EYES:
                self._held_obs[eye] = observe_face(
                    target, head, geom, self.true_gaze[eye], eye, cfg.camera,
                    t, noise_std_px=self.scenario.noise_std_px, rng=self.rng)
            self._next_camera_t += 1.0 / cfg.camera_rate_hz

        records = []
        tick_rates: dict[str, tuple[float, float]] = {}
        for eye in EYES:
            obs = self._held_obs[eye]
            error = (normalized_error(obs, cfg.camera)
                     if obs is not None and obs.valid else None)
            rates = gaze_command(cfg.supervisor, self.controllers[eye], error,
                                 head_rate, self.dt,
                                 vor_enabled=not self.scenario.vor_disabled)
            tick_rates[eye] = rates
            g = self.goal_gaze[eye]
            g = GazeState(pan=g.pan + rates[0] * self.dt,
                          tilt=g.tilt + rates[1] * self.dt)
            g, _ = plant.clamp_gaze(geom, g)
            self.goal_gaze[eye] = g

        goals = []
        for eye in EYES:
            h, v = plant.gaze_to_servo(geom, self.goal_gaze[eye])
            goals.append((self.servo_ids[(eye, "h")], CENTER_DEG + h))
            goals.append((self.servo_ids[(eye, "v")], CENTER_DEG + v))
        self.client.sync_write_goals(goals)
        self.bus.step(self.dt)

        for eye in EYES:
            # physical truth for the next camera sample: continuous positions
            sh = self.bus.servos[self.servo_ids[(eye, "h")]].state.position_deg
            sv = self.bus.servos[self.servo_ids[(eye, "v")]].state.position_deg
            self.true_gaze[eye], _ = plant.servo_to_gaze(
                geom, sh - CENTER_DEG, sv - CENTER_DEG)

            # recorded gaze goes through the protocol read path (quantized)
            h_deg = self.client.read_present_position(self.servo_ids[(eye, "h")])
            v_deg = self.client.read_present_position(self.servo_ids[(eye, "v")])
            gq, _ = plant.servo_to_gaze(geom, h_deg - CENTER_DEG, v_deg - CENTER_DEG)

            obs = self._held_obs[eye]
            valid = obs is not None and obs.valid
            u, v = obs.center if obs is not None else (math.nan, math.nan)
            ex, ey = (normalized_error(obs, cfg.camera) if valid
                      else (math.nan, math.nan))
            ctrl = self.controllers[eye]
            records.append(TraceRecord(
                t=t, eye=eye, u=u, v=v, valid=valid, ex=ex, ey=ey,
                pan_deg=math.degrees(gq.pan), tilt_deg=math.degrees(gq.tilt),
                servo_h_units=self.bus.servos[self.servo_ids[(eye, "h")]].present_position_units,
                servo_v_units=self.bus.servos[self.servo_ids[(eye, "v")]].present_position_units,
                mode=ctrl.mode.value, vor_active=ctrl.vor_active,
                head_yaw=head.yaw, head_pitch=head.pitch,
            ))
        self._records.extend(records)
        self.rate_log.append(tick_rates)
        self.tick += 1
        return records

    def run(self) -> Trace:
        n_ticks = int(round(self.scenario.duration_s * self.cfg.control_rate_hz))
        while self.tick < n_ticks:
            self.step()
        return self.trace()

    def trace(self) -> Trace:
        return Trace(records=tuple(self._records), dt=self.dt,
                     camera_width_px=self.cfg.camera.width_px)


def run(scenario: Scenario, cfg: SimConfig | None = None) -> Trace:
    return Engine(scenario, cfg).run()


# ---------------------------------------------------------------------------
# Metrics


def metrics(trace: Trace, settle_band: float = 0.05) -> Metrics:
    ticks = trace.ticks()
    if not ticks:
        raise ValueError("empty trace")

    def einf(pair) -> float:
        worst = 0.0
        for r in pair:
            if not r.valid:
                return math.inf
            worst = max(worst, abs(r.ex), abs(r.ey))
        return worst

    errors = [einf(p) for p in ticks]
    times = [p[0].t for p in ticks]

    settling: float | None = None
    for i in range(len(errors) - 1, -1, -1):
        if errors[i] >= settle_band:
            settling = times[i + 1] if i + 1 < len(errors) else None
            break
    else:
        settling = times[0]

    tail = ticks[int(len(ticks) * 0.8):]
    norms = [math.hypot(r.ex, r.ey) for p in tail for r in p if r.valid]
    steady = sum(norms) / len(norms) if norms else math.nan

    half_w = trace.camera_width_px / 2
    slips = []
    for eye in (LEFT, RIGHT):
        recs = trace.per_eye(eye)
        for a, b in zip(recs, recs[1:]):
            if a.valid and b.valid:
                slips.append(math.hypot(b.u - a.u, b.v - a.v) / trace.dt / half_w)
    rms = math.sqrt(sum(s * s for s in slips) / len(slips)) if slips else 0.0

    finite = [e for e in errors if math.isfinite(e)]
    peak = max(finite) if finite else math.inf
    return Metrics(settling_time_s=settling, steady_state_error=steady,
                   rms_retinal_slip=rms, peak_error=peak)
