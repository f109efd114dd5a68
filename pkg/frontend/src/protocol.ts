/** StateFrame schema and command builders for the /ws JSON interface. */

export interface EyeFrame {
  u: number | null;
  v: number | null;
  valid: boolean;
  ex: number | null;
  ey: number | null;
  pan_deg: number;
  tilt_deg: number;
  mode: string;
}

export interface StateFrame {
  t: number;
  left: EyeFrame;
  right: EyeFrame;
  head: { yaw: number; pitch: number };
  target: { x: number; y: number; z: number };
}

export interface ErrorFrame {
  error: string;
}

export type ServerMessage =
  | { kind: "frame"; frame: StateFrame }
  | { kind: "error"; message: string }
  | { kind: "invalid"; raw: string };

function isNumberOrNull(x: unknown): x is number | null {
  return x === null || typeof x === "number";
}

function isEyeFrame(x: unknown): x is EyeFrame {
  if (typeof x !== "object" || x === null) return false;
  const e = x as Record<string, unknown>;
  return (
    isNumberOrNull(e.u) &&
    isNumberOrNull(e.v) &&
    typeof e.valid === "boolean" &&
    isNumberOrNull(e.ex) &&
    isNumberOrNull(e.ey) &&
    typeof e.pan_deg === "number" &&
    typeof e.tilt_deg === "number" &&
    typeof e.mode === "string"
  );
}

function isStateFrame(x: unknown): x is StateFrame {
  if (typeof x !== "object" || x === null) return false;
  const f = x as Record<string, unknown>;
  const head = f.head as Record<string, unknown> | undefined;
  const target = f.target as Record<string, unknown> | undefined;
  return (
    typeof f.t === "number" &&
    isEyeFrame(f.left) &&
    isEyeFrame(f.right) &&
    typeof head === "object" && head !== null &&
    typeof head.yaw === "number" &&
    typeof head.pitch === "number" &&
    typeof target === "object" && target !== null &&
    typeof target.x === "number" &&
    typeof target.y === "number" &&
    typeof target.z === "number"
  );
}

/** Classify a raw server message without throwing. */
export function parseServerMessage(raw: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return { kind: "invalid", raw };
  }
  if (typeof data === "object" && data !== null && "error" in data) {
    const message = (data as ErrorFrame).error;
    return { kind: "error", message: String(message) };
  }
  if (isStateFrame(data)) {
    return { kind: "frame", frame: data };
  }
  return { kind: "invalid", raw };
}

export function setTarget(x: number, y: number, z: number): string {
  return JSON.stringify({ cmd: "set_target", x, y, z });
}

export function setHead(yaw: number, pitch: number): string {
  return JSON.stringify({ cmd: "set_head", yaw, pitch });
}

export interface Gains {
  kp?: number;
  ki?: number;
  kd?: number;
  vor_gain?: number;
}

export function setGains(gains: Gains): string {
  return JSON.stringify({ cmd: "set_gains", ...gains });
}

export function reset(): string {
  return JSON.stringify({ cmd: "reset" });
}
