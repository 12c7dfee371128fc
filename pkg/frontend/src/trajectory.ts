// Trajectory playback: maps wall-clock time onto the received sample list,
// clamped to the ends, so the animation survives sparse or truncated
// streams without ever stepping backwards.

import type { TrajectorySample } from "./types.js";

export class TrajectoryPlayer {
  private samples: TrajectorySample[] = [];
  private startedAt: number | null = null;
  private rate = 1.0;

  load(samples: TrajectorySample[]): void {
    this.samples = [...samples].sort((a, b) => a.t - b.t);
    this.startedAt = null;
  }

  get length(): number {
    return this.samples.length;
  }

  get duration(): number {
    if (this.samples.length === 0) return 0;
    return this.samples[this.samples.length - 1].t - this.samples[0].t;
  }

  start(now: number, rate = 1.0): void {
    this.startedAt = now;
    this.rate = rate;
  }

  /** Sample index for the given wall clock, clamped within bounds. */
  cursorAt(now: number): number {
    if (this.samples.length === 0) return 0;
    if (this.startedAt === null) return 0;
    const elapsed = Math.max(0, (now - this.startedAt) * this.rate);
    const t = this.samples[0].t + elapsed;
    let lo = 0;
    let hi = this.samples.length - 1;
    if (t >= this.samples[hi].t) return hi;
    while (lo + 1 < hi) {
      const mid = (lo + hi) >> 1;
      if (this.samples[mid].t <= t) lo = mid;
      else hi = mid;
    }
    return lo;
  }

  sampleAt(now: number): TrajectorySample | null {
    if (this.samples.length === 0) return null;
    return this.samples[this.cursorAt(now)];
  }

  finished(now: number): boolean {
    if (this.samples.length === 0) return true;
    return this.cursorAt(now) >= this.samples.length - 1;
  }
}
