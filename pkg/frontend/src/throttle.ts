/** Trailing-edge throttle: forwards at most one call per interval and
 * always delivers the most recent suppressed value at the end of the
 * interval, so the receiver converges on the final state. */

export interface Scheduler {
  now(): number; // ms
  setTimeout(fn: () => void, delayMs: number): number;
  clearTimeout(id: number): void;
}

export const wallClock: Scheduler = {
  now: () => Date.now(),
  setTimeout: (fn, d) => setTimeout(fn, d) as unknown as number,
  clearTimeout: (id) => clearTimeout(id),
};

export function throttle<T>(
  fn: (value: T) => void,
  minIntervalMs: number,
  sched: Scheduler = wallClock,
): (value: T) => void {
  let lastSent = -Infinity;
  let pending: { value: T } | null = null;
  let timer: number | null = null;

  const flush = () => {
    timer = null;
    if (pending !== null) {
      const { value } = pending;
      pending = null;
      lastSent = sched.now();
      fn(value);
    }
  };

  return (value: T) => {
    const now = sched.now();
    if (now - lastSent >= minIntervalMs) {
      lastSent = now;
      fn(value);
      return;
    }
    pending = { value };
    if (timer === null) {
      timer = sched.setTimeout(flush, minIntervalMs - (now - lastSent));
    }
  };
}
