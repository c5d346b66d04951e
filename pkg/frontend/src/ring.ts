// Time-windowed aligned series for the telemetry plots (last 30 s by default).

export class AlignedRing {
  readonly windowSeconds: number;
  private ts: number[] = [];
  private cols: (number | null)[][];

  constructor(nSeries: number, windowSeconds = 30) {
    this.windowSeconds = windowSeconds;
    this.cols = Array.from({ length: nSeries }, () => []);
  }

  get length(): number {
    return this.ts.length;
  }

  push(t: number, row: (number | null)[]): void {
    if (row.length !== this.cols.length) {
      throw new Error(`expected ${this.cols.length} values, got ${row.length}`);
    }
    if (this.ts.length > 0 && t <= this.ts[this.ts.length - 1]) {
      return; // stale or duplicate sample (e.g. replayed after reconnect)
    }
    this.ts.push(t);
    row.forEach((v, i) => this.cols[i].push(v));
    const cutoff = t - this.windowSeconds;
    let drop = 0;
    while (drop < this.ts.length && this.ts[drop] < cutoff) drop++;
    if (drop > 0) {
      this.ts.splice(0, drop);
      for (const c of this.cols) c.splice(0, drop);
    }
  }

  /** uPlot-style aligned data: [timestamps, series0, series1, ...]. */
  data(): (number | null)[][] {
    return [this.ts.slice(), ...this.cols.map((c) => c.slice())];
  }

  clear(): void {
    this.ts = [];
    this.cols = this.cols.map(() => []);
  }
}
