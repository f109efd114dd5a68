"""Live simulation over WebSocket: the sim loop runs in real time, broadcasts
StateFrame JSON to every client, and applies client commands atomically
between ticks."""

from __future__ import annotations

import asyncio
import contextlib
import json
import math
import time
from dataclasses import replace
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .config import AppConfig
from .sim import Engine, Scenario, TraceRecord
from .vision import LEFT, RIGHT, FaceTarget, HeadPose

DEFAULT_TARGET = (0.0, 0.0, 1.5)


def _live_scenario(noise_px: float) -> Scenario:
    face = FaceTarget(position=DEFAULT_TARGET)
    return Scenario(name="live", duration_s=1e9,
                    target=lambda t: face, head=lambda t: HeadPose(),
                    noise_std_px=noise_px, seed=int(time.time()))


class LiveSim:
    """Owns the engine and the single stepping loop; connection handlers talk
    to it only through the command queue and subscriber queues."""

    def __init__(self, app_config: AppConfig):
        self.app_config = app_config
        self.commands: asyncio.Queue[dict] = asyncio.Queue()
        self.subscribers: set[asyncio.Queue] = set()
        self._reset_engine()

    def _reset_engine(self) -> None:
        self.engine = Engine(_live_scenario(self.app_config.noise_px),
                             self.app_config.sim,
                             servo_ids=self.app_config.servo_ids)
        self.engine.target_override = FaceTarget(
            position=DEFAULT_TARGET,
            face_width_m=self.app_config.face_width_m)
        self.engine.head_override = HeadPose()

    def apply_command(self, cmd: dict) -> None:
        name = cmd.get("cmd")
        if name == "set_target":
            self.engine.target_override = FaceTarget(
                position=(float(cmd["x"]), float(cmd["y"]), float(cmd["z"])),
                face_width_m=self.app_config.face_width_m)
        elif name == "set_head":
            self.engine.head_override = HeadPose(
                yaw=float(cmd["yaw"]), pitch=float(cmd["pitch"]))
        elif name == "set_gains":
            sup = self.engine.cfg.supervisor
            if "vor_gain" in cmd:
                sup = replace(sup, vor_gain=float(cmd["vor_gain"]))
            pid_keys = {k: float(cmd[k]) for k in ("kp", "ki", "kd") if k in cmd}
            if pid_keys:
                sup = replace(sup, pursuit_gains=replace(sup.pursuit_gains,
                                                         **pid_keys))
            self.engine.cfg = replace(self.engine.cfg, supervisor=sup)
        elif name == "reset":
            self._reset_engine()
        else:
            raise ValueError(f"unknown command {name!r}")

    def state_frame(self, records: list[TraceRecord]) -> dict:
        by_eye = {r.eye: r for r in records}
        target = self.engine.target_override or self.engine.scenario.target(self.engine.t)
        head = self.engine.head_override or self.engine.scenario.head(self.engine.t)

        def eye_payload(r: TraceRecord) -> dict:
            return {
                "u": None if math.isnan(r.u) else r.u,
                "v": None if math.isnan(r.v) else r.v,
                "valid": r.valid,
                "ex": None if math.isnan(r.ex) else r.ex,
                "ey": None if math.isnan(r.ey) else r.ey,
                "pan_deg": r.pan_deg,
                "tilt_deg": r.tilt_deg,
                "mode": r.mode,
            }

        return {
            "t": records[0].t,
            "left": eye_payload(by_eye[LEFT]),
            "right": eye_payload(by_eye[RIGHT]),
            "head": {"yaw": head.yaw, "pitch": head.pitch},
            "target": {"x": target.position[0], "y": target.position[1],
                       "z": target.position[2]},
        }

    async def loop(self) -> None:
        """Real-time stepping with drift-corrected wall-clock scheduling."""
        dt = self.engine.dt
        broadcast_every = max(1, round(self.engine.cfg.control_rate_hz
                                       / self.app_config.serve_frame_rate_hz))
        next_tick = time.monotonic()
        ticks = 0
        while True:
            # commands apply atomically before the tick they affect
            while not self.commands.empty():
                self.apply_command(self.commands.get_nowait())
            records = self.engine.step()
            ticks += 1
            if ticks % broadcast_every == 0:
                frame = json.dumps(self.state_frame(records))
                for q in list(self.subscribers):
                    if q.full():
                        with contextlib.suppress(asyncio.QueueEmpty):
                            q.get_nowait()  # drop the oldest, never block
                    q.put_nowait(frame)
            next_tick += dt
            delay = next_tick - time.monotonic()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_tick = time.monotonic()  # fell behind; resynchronize
                await asyncio.sleep(0)


def create_app(app_config: AppConfig, ui_dir: str | Path | None = None) -> FastAPI:
    live = LiveSim(app_config)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(live.loop())
        yield
        task.cancel()
        with contextlib.suppress(asyncio.CancelledError):
            await task

    app = FastAPI(title="roboeye", lifespan=lifespan)
    app.state.live = live

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        frames: asyncio.Queue[str] = asyncio.Queue(maxsize=4)
        live.subscribers.add(frames)
        recv_task = asyncio.create_task(websocket.receive_text())
        send_task = asyncio.create_task(frames.get())
        try:
            while True:
                done, _ = await asyncio.wait(
                    {recv_task, send_task},
                    return_when=asyncio.FIRST_COMPLETED)
                if send_task in done:
                    await websocket.send_text(send_task.result())
                    send_task = asyncio.create_task(frames.get())
                if recv_task in done:
                    raw = recv_task.result()
                    recv_task = asyncio.create_task(websocket.receive_text())
                    try:
                        cmd = json.loads(raw)
                        if not isinstance(cmd, dict) or "cmd" not in cmd:
                            raise ValueError("expected an object with a 'cmd' field")
                        # validate eagerly so the client hears about bad input
                        live.commands.put_nowait(_validated(cmd))
                    except (ValueError, KeyError, TypeError) as e:
                        await websocket.send_text(json.dumps({"error": str(e)}))
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            live.subscribers.discard(frames)
            recv_task.cancel()
            send_task.cancel()

    if ui_dir is None:
        ui_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


_COMMANDS = {
    "set_target": {"x", "y", "z"},
    "set_head": {"yaw", "pitch"},
    "set_gains": set(),
    "reset": set(),
}


def _validated(cmd: dict) -> dict:
    name = cmd.get("cmd")
    if name not in _COMMANDS:
        raise ValueError(f"unknown command {name!r}")
    missing = _COMMANDS[name] - cmd.keys()
    if missing:
        raise ValueError(f"{name} missing fields: {sorted(missing)}")
    for key, value in cmd.items():
        if key != "cmd" and not isinstance(value, (int, float)):
            raise ValueError(f"field {key!r} must be numeric")
    if name == "set_target" and float(cmd["z"]) <= 0:
        raise ValueError("target z must be positive")
    return cmd


def serve(app_config: AppConfig, port: int) -> None:
    import uvicorn

    uvicorn.run(create_app(app_config), host="0.0.0.0", port=port,
                log_level="info")
