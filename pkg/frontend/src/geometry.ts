/** Pure geometry for the top-down scene: head-frame gaze rays into world
 * coordinates and world <-> canvas mapping. World frame: x right (robot's
 * view is mirrored, so pan > 0 points toward -x), z forward. The top-down
 * canvas shows x across and z up-screen. */

export interface Vec2 {
  x: number; // m, world x
  z: number; // m, world z
}

export const EYE_BASELINE_M = 0.07;

/** Rotate a (x, z) direction left by `yawRad` (positive = leftward). */
export function rotateYaw(d: Vec2, yawRad: number): Vec2 {
  const c = Math.cos(yawRad);
  const s = Math.sin(yawRad);
  return { x: d.x * c - d.z * s, z: d.x * s + d.z * c };
}

/** World position of an eye for a given head yaw about the head center. */
export function eyePosition(eye: "L" | "R", headYawRad: number): Vec2 {
  const local: Vec2 = { x: eye === "L" ? -EYE_BASELINE_M / 2 : EYE_BASELINE_M / 2, z: 0 };
  return rotateYaw(local, headYawRad);
}

/** World-frame gaze ray direction (unit) for one eye. */
export function gazeDirection(panDeg: number, headYawRad: number): Vec2 {
  const pan = (panDeg * Math.PI) / 180;
  // pan > 0 rotates the optical axis leftward (toward -x) in the head frame
  return rotateYaw({ x: -Math.sin(pan), z: Math.cos(pan) }, headYawRad);
}

/** Intersection of the two gaze rays, or null when (near-)parallel or the
 * crossing lies behind either eye. Used to sanity-check convergence. */
export function rayIntersection(
  pL: Vec2, dL: Vec2, pR: Vec2, dR: Vec2,
): Vec2 | null {
  const det = dL.x * -dR.z - -dR.x * dL.z;
  if (Math.abs(det) < 1e-9) return null;
  const bx = pR.x - pL.x;
  const bz = pR.z - pL.z;
  const s = (bx * -dR.z - -dR.x * bz) / det;
  const u = (dL.x * bz - dL.z * bx) / det;
  if (s <= 0 || u <= 0) return null;
  return { x: pL.x + s * dL.x, z: pL.z + s * dL.z };
}

export interface View {
  widthPx: number;
  heightPx: number;
  metersAcross: number; // world meters spanned by the canvas width
}

export function worldToCanvas(p: Vec2, view: View): { x: number; y: number } {
  const scale = view.widthPx / view.metersAcross;
  return {
    x: view.widthPx / 2 + p.x * scale,
    y: view.heightPx - 30 - p.z * scale,
  };
}

export function canvasToWorld(px: { x: number; y: number }, view: View): Vec2 {
  const scale = view.widthPx / view.metersAcross;
  return {
    x: (px.x - view.widthPx / 2) / scale,
    z: (view.heightPx - 30 - px.y) / scale,
  };
}
