import { describe, expect, it } from "vitest";

import { PerKeyThrottle } from "../src/throttle.js";

describe("PerKeyThrottle", () => {
  it("allows at most one event per key per interval", () => {
    const th = new PerKeyThrottle(20);
    expect(th.ready("hand_r", 0)).toBe(true);
    expect(th.ready("hand_r", 5)).toBe(false);
    expect(th.ready("hand_r", 19.9)).toBe(false);
    expect(th.ready("hand_r", 20)).toBe(true);
  });

  it("tracks keys independently", () => {
    const th = new PerKeyThrottle(20);
    expect(th.ready("hand_r", 0)).toBe(true);
    expect(th.ready("head", 1)).toBe(true);
    expect(th.ready("hand_r", 10)).toBe(false);
    expect(th.ready("head", 10)).toBe(false);
  });

  it("reset clears history", () => {
    const th = new PerKeyThrottle(20);
    th.ready("hand_r", 0);
    th.reset();
    expect(th.ready("hand_r", 1)).toBe(true);
  });
});
