"""Per-eye pinhole camera model and the simulated ground-truth face source.

Frames: world/body x right, y up, z forward. Gaze pan > 0 turns the optical
axis leftward (toward -x), tilt > 0 upward (toward +y), matching the plant's
sign convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .plant import EyeGeometry, GazeState
from .rng import SplitMix64

LEFT = "L"
RIGHT = "R"
EYES = (LEFT, RIGHT)


@dataclass(frozen=True)
class CameraModel:
    width_px: int = 640
    height_px: int = 480
    horizontal_fov_deg: float = 60.0

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError("image dimensions must be positive")
        if not 0 < self.horizontal_fov_deg < 180:
            raise ValueError("fov must be in (0, 180) deg")

    @property
    def focal_px(self) -> float:
        return (self.width_px / 2) / math.tan(math.radians(self.horizontal_fov_deg) / 2)


@dataclass(frozen=True)
class FaceTarget:
    """Face center in meters, anchored at the robot base (x right, y up, z forward)."""

    position: tuple[float, float, float]
    face_width_m: float = 0.16

    def __post_init__(self):
        if self.face_width_m <= 0:
            raise ValueError("face width must be positive")


@dataclass(frozen=True)
class HeadPose:
    yaw: float = 0.0  # rad, positive turns the head leftward
    pitch: float = 0.0  # rad, positive up

    def __post_init__(self):
        if not (math.isfinite(self.yaw) and math.isfinite(self.pitch)):
            raise ValueError("head pose must be finite")


@dataclass(frozen=True)
class FaceObservation:
    camera: str  # LEFT or RIGHT
    center: tuple[float, float]
    bbox: tuple[float, float, float, float]
    timestamp: float
    valid: bool


class FaceSource:
    """Port for anything that yields per-eye face observations over time."""

    def next_observation(self, eye: str, t: float) -> FaceObservation:
        raise NotImplementedError


def _rot_yaw_left(psi: float) -> np.ndarray:
    c, s = math.cos(psi), math.sin(psi)
    # positive psi maps +z toward -x (leftward)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def _rot_pitch_up(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    # positive phi maps +z toward +y (upward)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])


@dataclass(frozen=True)
class CameraPose:
    position: np.ndarray  # 3-vector, m, world frame
    rotation: np.ndarray  # 3x3, camera frame -> world frame

    def world_to_camera(self, point: np.ndarray) -> np.ndarray:
        return self.rotation.T @ (np.asarray(point, dtype=float) - self.position)

    @property
    def optical_axis(self) -> np.ndarray:
        return self.rotation @ np.array([0.0, 0.0, 1.0])


def eye_camera_pose(geom: EyeGeometry, head: HeadPose, eye: str,
                    gaze: GazeState) -> CameraPose:
    """World pose of one eye camera: baseline offset plus head and gaze rotations."""
    half_base_m = geom.interocular_distance_mm / 2000.0
    offset = np.array([-half_base_m if eye == LEFT else half_base_m, 0.0, 0.0])
    head_rot = _rot_yaw_left(head.yaw) @ _rot_pitch_up(head.pitch)
    gaze_rot = _rot_yaw_left(gaze.pan) @ _rot_pitch_up(gaze.tilt)
    return CameraPose(position=head_rot @ offset, rotation=head_rot @ gaze_rot)


def _far_field_direction(point: np.ndarray) -> np.ndarray | None:
    """Direction of a point at infinity, or None for an ordinary finite point.

    A coordinate of +/-inf marks a far-field target (e.g. a face at optical
    infinity); finite offsets vanish in the limit, so it projects as a pure
    direction with nonzero entries only on the infinite axes.
    """
    if np.all(np.isfinite(point)):
        return None
    return np.array([0.0 if math.isfinite(c) else math.copysign(1.0, c)
                     for c in point])


def project(cam: CameraModel, pose: CameraPose,
            point: tuple[float, float, float] | np.ndarray
            ) -> tuple[float, float] | None:
    """Pixel coordinates of a world point, or None if behind the camera."""
    point = np.asarray(point, dtype=float)
    direction = _far_field_direction(point)
    if direction is not None:
        p = pose.rotation.T @ direction
    else:
        p = pose.world_to_camera(point)
    if p[2] <= 0:
        return None
    f = cam.focal_px
    u = cam.width_px / 2 + f * p[0] / p[2]
    v = cam.height_px / 2 - f * p[1] / p[2]
    return (float(u), float(v))


def observe_face(face: FaceTarget, head: HeadPose, geom: EyeGeometry,
                 gaze: GazeState, eye: str, cam: CameraModel, t: float,
                 noise_std_px: float = 0.0,
                 rng: SplitMix64 | None = None) -> FaceObservation:
    """Synthesize one detector observation from ground truth.

    Off-frame or behind-camera projections yield valid=False, mimicking a
    tracker losing the face.
    """
    pose = eye_camera_pose(geom, head, eye, gaze)
    uv = project(cam, pose, face.position)
    if uv is None:
        return FaceObservation(camera=eye, center=(math.nan, math.nan),
                               bbox=(0.0, 0.0, 0.0, 0.0), timestamp=t, valid=False)
    u, v = uv
    if noise_std_px > 0.0 and rng is not None:
        u += rng.gauss(0.0, noise_std_px)
        v += rng.gauss(0.0, noise_std_px)
    position = np.asarray(face.position, dtype=float)
    if _far_field_direction(position) is not None:
        w = 0.0  # far-field target subtends no width
    else:
        z_cam = pose.world_to_camera(position)[2]
        w = cam.focal_px * face.face_width_m / z_cam
    bbox = (u - w / 2, v - w / 2, w, w)
    valid = 0 <= u < cam.width_px and 0 <= v < cam.height_px
    return FaceObservation(camera=eye, center=(u, v), bbox=bbox, timestamp=t,
                           valid=valid)


def normalized_error(obs: FaceObservation, cam: CameraModel) -> tuple[float, float]:
    """Image error in [-1, 1] per axis; (0, 0) means the face is centered."""
    if not obs.valid:
        raise ValueError("cannot compute error from an invalid observation")
    u, v = obs.center
    ex = (u - cam.width_px / 2) / (cam.width_px / 2)
    ey = (v - cam.height_px / 2) / (cam.height_px / 2)
    return (ex, ey)
