import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from roboeye.plant import EyeGeometry, GazeState
from roboeye.rng import SplitMix64
from roboeye.vision import (LEFT, RIGHT, CameraModel, FaceObservation,
                            FaceTarget, HeadPose, eye_camera_pose,
                            normalized_error, observe_face, project)

CAM = CameraModel()
GEOM = EyeGeometry()


def test_focal_length():
    assert CAM.focal_px == pytest.approx(554.256, abs=1e-3)


def test_camera_invariants():
    with pytest.raises(ValueError):
        CameraModel(horizontal_fov_deg=180)
    with pytest.raises(ValueError):
        CameraModel(width_px=0)


class TestEyePose:
    def test_left_eye_baseline(self):
        pose = eye_camera_pose(GEOM, HeadPose(), LEFT, GazeState())
        assert pose.position == pytest.approx([-0.035, 0.0, 0.0])
        assert pose.optical_axis == pytest.approx([0.0, 0.0, 1.0])

    def test_right_mirrors_left(self):
        left = eye_camera_pose(GEOM, HeadPose(), LEFT, GazeState())
        right = eye_camera_pose(GEOM, HeadPose(), RIGHT, GazeState())
        assert right.position[0] == -left.position[0]

    def test_head_gaze_composition_cancels(self):
        pose = eye_camera_pose(GEOM, HeadPose(yaw=math.radians(10)), LEFT,
                               GazeState(pan=math.radians(-10)))
        assert pose.optical_axis == pytest.approx([0.0, 0.0, 1.0], abs=1e-12)


class TestProject:
    def test_principal_point(self):
        pose = eye_camera_pose(GEOM, HeadPose(), LEFT, GazeState())
        uv = project(CAM, pose, np.array(pose.position) + [0.0, 0.0, 1.0])
        assert uv == pytest.approx((320.0, 240.0))

    def test_ten_degrees_right(self):
        pose = eye_camera_pose(GEOM, HeadPose(), LEFT, GazeState())
        point = np.array(pose.position) + [math.tan(math.radians(10)), 0.0, 1.0]
        u, v = project(CAM, pose, point)
        assert u == pytest.approx(320 + 554.256 * math.tan(math.radians(10)), abs=1e-2)
        assert u == pytest.approx(417.73, abs=0.01)

    def test_behind_camera(self):
        pose = eye_camera_pose(GEOM, HeadPose(), LEFT, GazeState())
        assert project(CAM, pose, (0.0, 0.0, -1.0)) is None

    def test_far_field_point_is_direction(self):
        pose = eye_camera_pose(GEOM, HeadPose(), LEFT, GazeState())
        assert project(CAM, pose, (0.0, 0.0, math.inf)) == (320.0, 240.0)

    @given(u=st.floats(1, 639), v=st.floats(1, 479),
           pan=st.floats(-0.3, 0.3), tilt=st.floats(-0.3, 0.3))
    def test_back_projection_consistency(self, u, v, pan, tilt):
        pose = eye_camera_pose(GEOM, HeadPose(), LEFT, GazeState(pan, tilt))
        f = CAM.focal_px
        # ray through (u, v) at depth 2 m in the camera frame
        z = 2.0
        p_cam = np.array([(u - 320) * z / f, -(v - 240) * z / f, z])
        world = pose.rotation @ p_cam + pose.position
        uv = project(CAM, pose, world)
        assert uv[0] == pytest.approx(u, abs=1e-9)
        assert uv[1] == pytest.approx(v, abs=1e-9)


class TestObserveFace:
    def test_midline_face_disparity(self):
        face = FaceTarget(position=(0.0, 0.0, 1.0))
        obs_l = observe_face(face, HeadPose(), GEOM, GazeState(), LEFT, CAM, 0.0)
        obs_r = observe_face(face, HeadPose(), GEOM, GazeState(), RIGHT, CAM, 0.0)
        assert obs_l.center[1] == pytest.approx(240.0)
        assert obs_r.center[1] == pytest.approx(240.0)
        assert obs_l.center[0] == pytest.approx(339.40, abs=0.01)
        assert obs_l.center[0] > obs_r.center[0]  # u_L - u_R = f*b/z > 0

    def test_disparity_decreases_with_distance(self):
        def disparity(z):
            face = FaceTarget(position=(0.0, 0.0, z))
            l = observe_face(face, HeadPose(), GEOM, GazeState(), LEFT, CAM, 0.0)
            r = observe_face(face, HeadPose(), GEOM, GazeState(), RIGHT, CAM, 0.0)
            return l.center[0] - r.center[0]

        ds = [disparity(z) for z in (0.5, 1.0, 2.0, 4.0)]
        assert all(a > b > 0 for a, b in zip(ds, ds[1:]))

    def test_face_behind_robot_invalid(self):
        face = FaceTarget(position=(0.0, 0.0, -1.0))
        obs = observe_face(face, HeadPose(), GEOM, GazeState(), LEFT, CAM, 0.0)
        assert not obs.valid

    def test_off_frame_invalid(self):
        face = FaceTarget(position=(5.0, 0.0, 1.0))
        obs = observe_face(face, HeadPose(), GEOM, GazeState(), LEFT, CAM, 0.0)
        assert not obs.valid

    def test_noise_free_is_deterministic(self):
        face = FaceTarget(position=(0.1, 0.05, 1.5))
        a = observe_face(face, HeadPose(), GEOM, GazeState(), LEFT, CAM, 0.0)
        b = observe_face(face, HeadPose(), GEOM, GazeState(), LEFT, CAM, 0.0)
        assert a == b

    def test_noise_applied_with_rng(self):
        face = FaceTarget(position=(0.0, 0.0, 1.5))
        clean = observe_face(face, HeadPose(), GEOM, GazeState(), LEFT, CAM, 0.0)
        noisy = observe_face(face, HeadPose(), GEOM, GazeState(), LEFT, CAM, 0.0,
                             noise_std_px=2.0, rng=SplitMix64(1))
        assert noisy.center != clean.center

    def test_bbox_width_scales_with_range(self):
        near = observe_face(FaceTarget(position=(0.0, 0.0, 0.5)), HeadPose(),
                            GEOM, GazeState(), LEFT, CAM, 0.0)
        far = observe_face(FaceTarget(position=(0.0, 0.0, 2.0)), HeadPose(),
                           GEOM, GazeState(), LEFT, CAM, 0.0)
        assert near.bbox[2] == pytest.approx(4 * far.bbox[2], rel=1e-6)


class TestNormalizedError:
    def test_centered(self):
        obs = FaceObservation(LEFT, (320.0, 240.0), (0, 0, 10, 10), 0.0, True)
        assert normalized_error(obs, CAM) == (0.0, 0.0)

    def test_corner(self):
        obs = FaceObservation(LEFT, (640.0, 480.0), (0, 0, 10, 10), 0.0, True)
        assert normalized_error(obs, CAM) == (1.0, 1.0)

    def test_half_right(self):
        obs = FaceObservation(LEFT, (480.0, 240.0), (0, 0, 10, 10), 0.0, True)
        assert normalized_error(obs, CAM) == (0.5, 0.0)

    def test_invalid_raises(self):
        obs = FaceObservation(LEFT, (math.nan, math.nan), (0, 0, 0, 0), 0.0, False)
        with pytest.raises(ValueError):
            normalized_error(obs, CAM)

    @given(du=st.floats(-300, 300), dv=st.floats(-220, 220))
    def test_odd_function(self, du, dv):
        plus = FaceObservation(LEFT, (320 + du, 240 + dv), (0, 0, 1, 1), 0.0, True)
        minus = FaceObservation(LEFT, (320 - du, 240 - dv), (0, 0, 1, 1), 0.0, True)
        ep = normalized_error(plus, CAM)
        em = normalized_error(minus, CAM)
        assert ep[0] == pytest.approx(-em[0], abs=1e-12)
        assert ep[1] == pytest.approx(-em[1], abs=1e-12)
