/** Wires the socket, ring buffer, canvases, and controls together. */

import { canvasToWorld } from "./geometry.js";
import {
  reset, setGains, setHead, setTarget, type StateFrame,
} from "./protocol.js";
import {
  TOPDOWN_VIEW, describeMode, drawImagePlane, drawTopdown, targetHit,
} from "./render.js";
import { FrameRing } from "./ring.js";
import { ReconnectingSocket } from "./socket.js";
import { throttle } from "./throttle.js";

const MAX_COMMAND_RATE_HZ = 30;

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const topdown = byId<HTMLCanvasElement>("topdown");
const planeLeft = byId<HTMLCanvasElement>("plane-left");
const planeRight = byId<HTMLCanvasElement>("plane-right");
const status = byId<HTMLSpanElement>("status");
const modeLabel = byId<HTMLSpanElement>("modes");
const toast = byId<HTMLDivElement>("toast");

topdown.width = TOPDOWN_VIEW.widthPx;
topdown.height = TOPDOWN_VIEW.heightPx;

const ring = new FrameRing(10.0);
let latest: StateFrame | undefined;
let connected = false;

let toastTimer: number | undefined;
function showToast(message: string): void {
  toast.textContent = message;
  toast.classList.add("visible");
  if (toastTimer !== undefined) clearTimeout(toastTimer);
  toastTimer = setTimeout(() => toast.classList.remove("visible"), 4000);
}

const socket = new ReconnectingSocket(
  `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`,
  {
    onFrame(frame) {
      latest = frame;
      ring.push(frame);
    },
    onServerError(message) {
      showToast(`server: ${message}`);
    },
    onStatus(up) {
      connected = up;
      status.textContent = up ? "connected" : "reconnecting…";
      status.className = up ? "ok" : "down";
      if (!up) ring.clear();
    },
  },
);

// --- target dragging (throttled to the command-rate cap) ---------------

const sendTarget = throttle<{ x: number; z: number }>(
  (p) => socket.send(setTarget(p.x, 0.0, p.z)),
  1000 / MAX_COMMAND_RATE_HZ,
);

let dragging = false;

function pointerWorld(ev: PointerEvent): { x: number; z: number } {
  const rect = topdown.getBoundingClientRect();
  const p = canvasToWorld(
    { x: ev.clientX - rect.left, y: ev.clientY - rect.top }, TOPDOWN_VIEW);
  return { x: p.x, z: Math.max(p.z, 0.05) };
}

topdown.addEventListener("pointerdown", (ev) => {
  if (!latest) return;
  const rect = topdown.getBoundingClientRect();
  if (targetHit(latest, { x: ev.clientX - rect.left, y: ev.clientY - rect.top })) {
    dragging = true;
    topdown.setPointerCapture(ev.pointerId);
  }
});
topdown.addEventListener("pointermove", (ev) => {
  if (!dragging || !connected) return;
  sendTarget(pointerWorld(ev));
});
topdown.addEventListener("pointerup", (ev) => {
  if (dragging && connected) sendTarget(pointerWorld(ev));
  dragging = false;
});

// --- head and gain controls --------------------------------------------

const yawSlider = byId<HTMLInputElement>("head-yaw");
const pitchSlider = byId<HTMLInputElement>("head-pitch");
const yawValue = byId<HTMLSpanElement>("head-yaw-value");
const pitchValue = byId<HTMLSpanElement>("head-pitch-value");

const sendHead = throttle<{ yaw: number; pitch: number }>(
  (h) => socket.send(setHead(h.yaw, h.pitch)),
  1000 / MAX_COMMAND_RATE_HZ,
);

function headChanged(): void {
  const yawDeg = Number(yawSlider.value);
  const pitchDeg = Number(pitchSlider.value);
  yawValue.textContent = `${yawDeg}°`;
  pitchValue.textContent = `${pitchDeg}°`;
  sendHead({
    yaw: (yawDeg * Math.PI) / 180,
    pitch: (pitchDeg * Math.PI) / 180,
  });
}
yawSlider.addEventListener("input", headChanged);
pitchSlider.addEventListener("input", headChanged);

const vorToggle = byId<HTMLInputElement>("vor-toggle");
vorToggle.addEventListener("change", () => {
  socket.send(setGains({ vor_gain: vorToggle.checked ? 1.0 : 0.0 }));
});

byId<HTMLButtonElement>("apply-gains").addEventListener("click", () => {
  const kp = Number(byId<HTMLInputElement>("gain-kp").value);
  const ki = Number(byId<HTMLInputElement>("gain-ki").value);
  const kd = Number(byId<HTMLInputElement>("gain-kd").value);
  if ([kp, ki, kd].some((g) => !Number.isFinite(g) || g < 0)) {
    showToast("gains must be non-negative numbers");
    return;
  }
  socket.send(setGains({ kp, ki, kd }));
});

byId<HTMLButtonElement>("reset").addEventListener("click", () => {
  socket.send(reset());
  yawSlider.value = "0";
  pitchSlider.value = "0";
  vorToggle.checked = true;
  yawValue.textContent = "0°";
  pitchValue.textContent = "0°";
});

// --- render loop --------------------------------------------------------

const ctxTop = topdown.getContext("2d")!;
const ctxL = planeLeft.getContext("2d")!;
const ctxR = planeRight.getContext("2d")!;

function render(): void {
  drawTopdown(ctxTop, latest, connected);
  drawImagePlane(ctxL, ring, "left", planeLeft.width, planeLeft.height);
  drawImagePlane(ctxR, ring, "right", planeRight.width, planeRight.height);
  modeLabel.textContent = describeMode(latest);
  requestAnimationFrame(render);
}
requestAnimationFrame(render);
