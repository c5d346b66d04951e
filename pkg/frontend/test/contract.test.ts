// Wire contract: a state message captured from the running bridge must parse
// and feed the plot/scene data paths without surprises.

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { parseServerMessage } from "../src/protocol.js";
import { AlignedRing } from "../src/ring.js";

const raw = readFileSync(new URL("./fixtures/state_message.json", import.meta.url), "utf8");

describe("bridge state fixture", () => {
  it("parses as a state message with the full schema", () => {
    const msg = parseServerMessage(raw);
    expect(msg.kind).toBe("state");
    if (msg.kind !== "state") return;
    const p = msg.payload;
    expect(p.q).toHaveLength(7);
    expect(p.bounds_lo).toHaveLength(7);
    expect(p.taxels).toHaveLength(29);
    expect(p.links).toHaveLength(7);
    expect(Object.keys(p.human).length).toBeGreaterThan(0);
    expect(p.parts.map((x) => x.name).sort()).toEqual(["forearm", "hand"]);
    const hand = p.parts.find((x) => x.name === "hand")!;
    expect(hand.a_pps).toBeGreaterThan(0.2);
    expect(hand.p_c).toHaveLength(3);
    expect(hand.n_c).toHaveLength(3);
    for (const t of p.taxels) {
      expect(t.a).toBeGreaterThanOrEqual(0);
      expect(t.a).toBeLessThanOrEqual(1);
    }
  });

  it("feeds the telemetry rings", () => {
    const msg = parseServerMessage(raw);
    if (msg.kind !== "state") throw new Error("expected state");
    const p = msg.payload;
    const ring = new AlignedRing(3, 30);
    const j = 1;
    ring.push(p.t, [p.qdot[j], p.bounds_lo[j], p.bounds_hi[j]]);
    const [ts, qd, lo, hi] = ring.data();
    expect(ts).toEqual([p.t]);
    // the filtered command may transiently poke outside a freshly narrowed
    // band, so only sanity-check the values, not containment
    expect(Number.isFinite(qd[0]!)).toBe(true);
    expect(lo[0]!).toBeLessThanOrEqual(hi[0]!);
  });
});
