// Per-key rate limiter: at most one command per keypoint per tick period.

export class PerKeyThrottle {
  private last = new Map<string, number>();

  constructor(readonly minIntervalMs: number) {}

  /** True (and records the attempt) if `key` may fire at `nowMs`. */
  ready(key: string, nowMs: number): boolean {
    const prev = this.last.get(key);
    if (prev !== undefined && nowMs - prev < this.minIntervalMs) return false;
    this.last.set(key, nowMs);
    return true;
  }

  reset(): void {
    this.last.clear();
  }
}
