/** Canvas drawing: top-down scene and per-eye image-plane plots. All
 * rendered quantities come from StateFrame fields; nothing is simulated
 * locally. */

import {
  eyePosition, gazeDirection, worldToCanvas, type View, type Vec2,
} from "./geometry.js";
import type { EyeFrame, StateFrame } from "./protocol.js";
import type { FrameRing } from "./ring.js";

export const TOPDOWN_VIEW: View = {
  widthPx: 480,
  heightPx: 520,
  metersAcross: 1.6,
};

const IMAGE_W = 640;
const IMAGE_H = 480;

export function drawTopdown(
  ctx: CanvasRenderingContext2D,
  frame: StateFrame | undefined,
  connected: boolean,
): void {
  const view = TOPDOWN_VIEW;
  ctx.clearRect(0, 0, view.widthPx, view.heightPx);
  ctx.fillStyle = connected ? "#10141c" : "#2a2a2a";
  ctx.fillRect(0, 0, view.widthPx, view.heightPx);
  if (!frame) return;
  ctx.globalAlpha = connected ? 1.0 : 0.35;

  const yaw = frame.head.yaw;
  const eyes: Array<["L" | "R", EyeFrame]> = [
    ["L", frame.left],
    ["R", frame.right],
  ];

  // head outline
  const headC = worldToCanvas({ x: 0, z: 0 }, view);
  ctx.strokeStyle = "#5a6578";
  ctx.beginPath();
  ctx.arc(headC.x, headC.y, 32, 0, 2 * Math.PI);
  ctx.stroke();

  for (const [side, eye] of eyes) {
    const pos = eyePosition(side, yaw);
    const dir = gazeDirection(eye.pan_deg, yaw);
    const from = worldToCanvas(pos, view);
    const to = worldToCanvas(
      { x: pos.x + dir.x * 2.5, z: pos.z + dir.z * 2.5 }, view);
    ctx.strokeStyle = side === "L" ? "#4fc3f7" : "#ffb74d";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(from.x, from.y);
    ctx.lineTo(to.x, to.y);
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.beginPath();
    ctx.arc(from.x, from.y, 5, 0, 2 * Math.PI);
    ctx.fill();
  }

  // face target marker
  const t = worldToCanvas({ x: frame.target.x, z: frame.target.z }, view);
  ctx.strokeStyle = "#e57373";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(t.x, t.y, 10, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(t.x - 14, t.y);
  ctx.lineTo(t.x + 14, t.y);
  ctx.moveTo(t.x, t.y - 14);
  ctx.lineTo(t.x, t.y + 14);
  ctx.stroke();
  ctx.globalAlpha = 1.0;
}

/** Canvas-space hit test for the face target marker. */
export function targetHit(
  frame: StateFrame, px: { x: number; y: number },
): boolean {
  const t = worldToCanvas(
    { x: frame.target.x, z: frame.target.z }, TOPDOWN_VIEW);
  return Math.hypot(px.x - t.x, px.y - t.y) <= 16;
}

export function drawImagePlane(
  ctx: CanvasRenderingContext2D,
  ring: FrameRing,
  eye: "left" | "right",
  widthPx: number,
  heightPx: number,
): void {
  const sx = widthPx / IMAGE_W;
  const sy = heightPx / IMAGE_H;
  ctx.clearRect(0, 0, widthPx, heightPx);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, widthPx, heightPx);

  // center crosshair
  ctx.strokeStyle = "#3a4252";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(widthPx / 2, 0);
  ctx.lineTo(widthPx / 2, heightPx);
  ctx.moveTo(0, heightPx / 2);
  ctx.lineTo(widthPx, heightPx / 2);
  ctx.stroke();

  const frames = ring.all();
  if (frames.length === 0) return;
  const color = eye === "left" ? "#4fc3f7" : "#ffb74d";

  // 10 s trail of valid detections
  ctx.strokeStyle = color;
  ctx.globalAlpha = 0.55;
  ctx.beginPath();
  let pen = false;
  for (const f of frames) {
    const e = f[eye];
    if (e.valid && e.u !== null && e.v !== null) {
      const x = e.u * sx;
      const y = e.v * sy;
      if (pen) ctx.lineTo(x, y);
      else ctx.moveTo(x, y);
      pen = true;
    } else {
      pen = false; // gap where the face was lost
    }
  }
  ctx.stroke();
  ctx.globalAlpha = 1.0;

  // current marker: filled when valid, hollow at last position when lost
  const latest = frames[frames.length - 1][eye];
  let mark: { u: number; v: number } | null = null;
  if (latest.valid && latest.u !== null && latest.v !== null) {
    mark = { u: latest.u, v: latest.v };
  } else {
    for (let i = frames.length - 1; i >= 0; i--) {
      const e = frames[i][eye];
      if (e.valid && e.u !== null && e.v !== null) {
        mark = { u: e.u, v: e.v };
        break;
      }
    }
  }
  if (mark) {
    ctx.beginPath();
    ctx.arc(mark.u * sx, mark.v * sy, 6, 0, 2 * Math.PI);
    if (latest.valid) {
      ctx.fillStyle = color;
      ctx.fill();
    } else {
      ctx.strokeStyle = color;
      ctx.lineWidth = 2;
      ctx.stroke();
    }
  }
}

export function describeMode(frame: StateFrame | undefined): string {
  if (!frame) return "—";
  return `L: ${frame.left.mode}   R: ${frame.right.mode}`;
}

export { type Vec2 };
