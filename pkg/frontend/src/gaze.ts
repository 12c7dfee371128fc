// Cursor-as-gaze sampler: the live mouse position is sampled on a fixed
// clock (>= 20 Hz) and shipped to the service in small batches. When the
// network stalls, pending pixels buffer in a bounded queue and the oldest
// samples fall off first; reconnecting resumes from what is left.

export type BatchSender = (pixels: [number, number][]) => Promise<void>;

export class CursorSampler {
  private position: [number, number] | null = null;
  private queue: [number, number][] = [];
  private sending = false;

  constructor(
    private readonly send: BatchSender,
    private readonly batchSize = 5,
    private readonly maxQueue = 200,
  ) {}

  /** Track the latest cursor position (called from mousemove). */
  move(x: number, y: number): void {
    this.position = [x, y];
  }

  /** Take one sample on the fixed clock; returns queue length. */
  sample(): number {
    if (this.position !== null) {
      this.queue.push([this.position[0], this.position[1]]);
      if (this.queue.length > this.maxQueue) {
        this.queue.splice(0, this.queue.length - this.maxQueue);
      }
    }
    return this.queue.length;
  }

  pending(): number {
    return this.queue.length;
  }

  /** Flush one batch; on failure the batch returns to the queue head. */
  async flush(): Promise<boolean> {
    if (this.sending || this.queue.length < 1) return true;
    this.sending = true;
    const batch = this.queue.splice(0, this.batchSize);
    try {
      await this.send(batch);
      return true;
    } catch {
      this.queue.unshift(...batch);
      if (this.queue.length > this.maxQueue) {
        this.queue.splice(0, this.queue.length - this.maxQueue);
      }
      return false;
    } finally {
      this.sending = false;
    }
  }
}
