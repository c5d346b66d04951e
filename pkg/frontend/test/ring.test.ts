import { describe, expect, it } from "vitest";

import { AlignedRing } from "../src/ring.js";

describe("AlignedRing", () => {
  it("keeps aligned columns", () => {
    const ring = new AlignedRing(2, 30);
    ring.push(0.0, [1, 10]);
    ring.push(0.02, [2, null]);
    const [ts, a, b] = ring.data();
    expect(ts).toEqual([0.0, 0.02]);
    expect(a).toEqual([1, 2]);
    expect(b).toEqual([10, null]);
  });

  it("evicts samples older than the window", () => {
    const ring = new AlignedRing(1, 30);
    for (let k = 0; k <= 2000; k++) ring.push(k * 0.02, [k]);
    const [ts] = ring.data();
    expect(ts[0]).toBeGreaterThanOrEqual(2000 * 0.02 - 30);
    expect(ts[ts.length - 1]).toBeCloseTo(40.0);
    expect(ring.length).toBeLessThanOrEqual(1501);
  });

  it("ignores stale timestamps after reconnect replays", () => {
    const ring = new AlignedRing(1, 30);
    ring.push(1.0, [1]);
    ring.push(0.5, [99]);
    ring.push(1.0, [99]);
    ring.push(1.02, [2]);
    const [ts, v] = ring.data();
    expect(ts).toEqual([1.0, 1.02]);
    expect(v).toEqual([1, 2]);
  });

  it("rejects rows of the wrong width", () => {
    const ring = new AlignedRing(2, 30);
    expect(() => ring.push(0, [1])).toThrow();
  });

  it("clear empties all columns", () => {
    const ring = new AlignedRing(1, 30);
    ring.push(0, [1]);
    ring.clear();
    expect(ring.length).toBe(0);
    expect(ring.data()).toEqual([[], []]);
  });
});
