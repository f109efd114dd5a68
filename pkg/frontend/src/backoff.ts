/** Reconnect delay schedule: exponential from 0.5 s, capped at 8 s. */

export const INITIAL_DELAY_MS = 500;
export const MAX_DELAY_MS = 8000;

export function reconnectDelayMs(attempt: number): number {
  if (attempt < 0) throw new Error("attempt must be >= 0");
  return Math.min(INITIAL_DELAY_MS * 2 ** attempt, MAX_DELAY_MS);
}
