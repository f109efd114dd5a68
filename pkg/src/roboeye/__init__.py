"""Binocular tendon-driven robotic eye: plant model, Dynamixel 2.0 codec,
vision-based gaze control, and a deterministic closed-loop simulator."""

__version__ = "0.1.0"
