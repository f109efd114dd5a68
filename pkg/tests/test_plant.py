import math

import pytest
from hypothesis import given, strategies as st

from roboeye.plant import (EyeGeometry, GazeState, ServoModel, ServoState,
                           clamp_gaze, gaze_to_servo, servo_to_gaze,
                           step_servo, tendon_excursion)

GEOM = EyeGeometry()


def test_geometry_invariants():
    with pytest.raises(ValueError):
        EyeGeometry(eyeball_radius_mm=-1)
    with pytest.raises(ValueError):
        EyeGeometry(attachment_angle_deg=95)
    with pytest.raises(ValueError):
        EyeGeometry(bobbin_radius_mm=40.0)  # larger than eyeball


def test_tendon_excursion_identity():
    exc = tendon_excursion(GEOM, GazeState())
    assert exc.horizontal_mm == 0.0
    assert exc.vertical_mm == 0.0


def test_tendon_excursion_ten_degrees():
    exc = tendon_excursion(GEOM, GazeState(pan=math.radians(10)))
    assert exc.horizontal_mm == pytest.approx(5.235987755982988, abs=1e-12)


def test_tendon_excursion_antisymmetry():
    fwd = tendon_excursion(GEOM, GazeState(pan=math.radians(10)))
    bwd = tendon_excursion(GEOM, GazeState(pan=math.radians(-10)))
    assert bwd.horizontal_mm == -fwd.horizontal_mm


def test_tendon_excursion_out_of_range():
    with pytest.raises(ValueError):
        tendon_excursion(GEOM, GazeState(pan=math.radians(45)))


def test_gaze_to_servo_ratio():
    assert GEOM.transmission_ratio == 3.75
    h, v = gaze_to_servo(GEOM, GazeState(pan=math.radians(10)))
    assert h == pytest.approx(37.5, abs=1e-9)
    assert v == 0.0
    h, v = gaze_to_servo(GEOM, GazeState(tilt=math.radians(-4)))
    assert v == pytest.approx(-15.0, abs=1e-9)


def test_servo_to_gaze_inverse():
    gaze, clamped = servo_to_gaze(GEOM, 37.5, 0.0)
    assert math.degrees(gaze.pan) == pytest.approx(10.0, abs=1e-9)
    assert not clamped


@given(pan=st.floats(-30, 30), tilt=st.floats(-30, 30))
def test_round_trip_inverse_pair(pan, tilt):
    g = GazeState(pan=math.radians(pan), tilt=math.radians(tilt))
    h, v = gaze_to_servo(GEOM, g)
    back, clamped = servo_to_gaze(GEOM, h, v)
    assert not clamped
    assert back.pan == pytest.approx(g.pan, abs=1e-9)
    assert back.tilt == pytest.approx(g.tilt, abs=1e-9)


@given(pan=st.floats(-10, 10), k=st.floats(-2.5, 2.5))
def test_gaze_to_servo_linearity(pan, k):
    g1 = GazeState(pan=math.radians(pan))
    gk = GazeState(pan=math.radians(pan) * k)
    h1, _ = gaze_to_servo(GEOM, g1)
    hk, _ = gaze_to_servo(GEOM, gk)
    assert hk == pytest.approx(k * h1, abs=1e-9)


def test_clamp_gaze():
    g, flag = clamp_gaze(GEOM, GazeState(pan=math.radians(10)))
    assert not flag and g.pan == math.radians(10)
    g, flag = clamp_gaze(GEOM, GazeState(pan=math.radians(45)))
    assert flag and math.degrees(g.pan) == pytest.approx(30.0)
    g, flag = clamp_gaze(GEOM, GazeState(pan=math.radians(-45)))
    assert flag and math.degrees(g.pan) == pytest.approx(-30.0)


class TestStepServo:
    model = ServoModel()

    def test_fixed_point(self):
        s = ServoState(position_deg=50.0, goal_deg=50.0)
        assert step_servo(self.model, s, 0.01).position_deg == 50.0

    def test_rate_cap(self):
        s = ServoState(position_deg=0.0, goal_deg=100.0)
        out = step_servo(self.model, s, 0.010)
        # unconstrained first-order step would be 39.35 deg; slew cap wins
        assert out.position_deg == pytest.approx(6.84, abs=1e-9)

    def test_small_step_unconstrained(self):
        s = ServoState(position_deg=0.0, goal_deg=1.0)
        out = step_servo(self.model, s, 0.010)
        assert out.position_deg == pytest.approx(1 - math.exp(-0.5), abs=1e-12)
        assert out.position_deg == pytest.approx(0.3935, abs=1e-4)

    def test_bad_dt(self):
        with pytest.raises(ValueError):
            step_servo(self.model, ServoState(), 0.0)

    def test_convergence(self):
        s = ServoState(position_deg=0.0, goal_deg=73.0)
        prev_gap = abs(s.goal_deg - s.position_deg)
        for _ in range(10000):
            s = step_servo(self.model, s, 0.01)
            gap = abs(s.goal_deg - s.position_deg)
            assert gap <= prev_gap
            prev_gap = gap
            if gap < 1e-6:
                break
        assert prev_gap < 1e-6

    @given(goal=st.floats(-300, 300), dt=st.floats(0.001, 0.1))
    def test_rate_limit_safety(self, goal, dt):
        s = ServoState(position_deg=0.0, goal_deg=goal)
        out = step_servo(self.model, s, dt)
        assert abs(out.position_deg - s.position_deg) <= self.model.max_speed_deg_s * dt + 1e-12
