/** Time-windowed ring buffer of StateFrames: keeps the last `windowS`
 * seconds, in time order. Out-of-order frames (a server reset winds the
 * clock back) clear the buffer rather than corrupt the order invariant. */

import type { StateFrame } from "./protocol.js";

export class FrameRing {
  private frames: StateFrame[] = [];

  constructor(private readonly windowS: number = 10.0) {
    if (windowS <= 0) throw new Error("window must be positive");
  }

  push(frame: StateFrame): void {
    const last = this.frames[this.frames.length - 1];
    if (last !== undefined && frame.t <= last.t) {
      this.frames = [];
    }
    this.frames.push(frame);
    const cutoff = frame.t - this.windowS;
    let drop = 0;
    while (drop < this.frames.length && this.frames[drop].t < cutoff) drop++;
    if (drop > 0) this.frames = this.frames.slice(drop);
  }

  get latest(): StateFrame | undefined {
    return this.frames[this.frames.length - 1];
  }

  get length(): number {
    return this.frames.length;
  }

  all(): readonly StateFrame[] {
    return this.frames;
  }

  clear(): void {
    this.frames = [];
  }
}
