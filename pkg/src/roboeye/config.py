"""TOML configuration loading: packaged defaults, user overrides on top."""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .control import PidGains, SupervisorConfig
from .plant import EyeGeometry, ServoModel
from .sim import SimConfig
from .vision import LEFT, RIGHT, CameraModel

ENV_CONFIG_VAR = "OCULAR_CONFIG"


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class AppConfig:
    sim: SimConfig
    servo_ids: dict[tuple[str, str], int]
    face_width_m: float
    noise_px: float
    scenario_params: dict[str, dict]
    serve_port: int
    serve_frame_rate_hz: float


def _deep_merge(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {where}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"expected a table at {where}")
            out[key] = _deep_merge(base[key], value, where)
        else:
            if isinstance(value, dict):
                raise ConfigError(f"unexpected table at {where}")
            out[key] = value
    return out


def _default_raw() -> dict:
    data = resources.files("roboeye").joinpath("default_config.toml").read_bytes()
    return tomllib.loads(data.decode())


def load_config(path: str | Path | None = None) -> AppConfig:
    """Packaged defaults, overlaid with the user file if given (or the
    OCULAR_CONFIG env var as fallback)."""
    raw = _default_raw()
    if path is None:
        path = os.environ.get(ENV_CONFIG_VAR) or None
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            user = tomllib.loads(p.read_text())
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"invalid TOML in {p}: {e}") from e
        raw = _deep_merge(raw, user)
    return _build(raw)


def _build(raw: dict) -> AppConfig:
    try:
        geometry = EyeGeometry(**{f"{k}": v for k, v in raw["geometry"].items()})
        servo_model = ServoModel(**raw["servo_model"])
        camera = CameraModel(**raw["camera"])
        supervisor = SupervisorConfig(
            **{k: v for k, v in raw["supervisor"].items()},
            pursuit_gains=PidGains(**raw["control"]["pursuit"]),
            saccade_gains=PidGains(**raw["control"]["saccade"]),
        )
        sim = SimConfig(
            control_rate_hz=raw["sim"]["control_rate_hz"],
            camera_rate_hz=raw["sim"]["camera_rate_hz"],
            geometry=geometry, servo_model=servo_model, camera=camera,
            supervisor=supervisor,
        )
        ids = raw["servo_ids"]
        servo_ids = {(LEFT, "h"): int(ids["left_h"]), (LEFT, "v"): int(ids["left_v"]),
                     (RIGHT, "h"): int(ids["right_h"]), (RIGHT, "v"): int(ids["right_v"])}
        if len(set(servo_ids.values())) != 4:
            raise ConfigError("servo ids must be distinct")
        return AppConfig(
            sim=sim,
            servo_ids=servo_ids,
            face_width_m=float(raw["face"]["width_m"]),
            noise_px=float(raw["face"]["noise_px"]),
            scenario_params={k: dict(v) for k, v in raw["scenario"].items()},
            serve_port=int(raw["serve"]["port"]),
            serve_frame_rate_hz=float(raw["serve"]["frame_rate_hz"]),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid configuration: {e}") from e
