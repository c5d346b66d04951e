// Bridge wire protocol (schema v1). The server broadcasts at most one state
// message per tick; commands are acked with the tick at which they applied.

export const PROTOCOL_VERSION = 1;

export interface PoseMsg {
  position: number[];
  orientation_wxyz: number[];
}

export interface PartMsg {
  name: string;
  a_pps: number;
  p_c: number[] | null;
  n_c: number[] | null;
}

export interface TaxelMsg {
  part: string;
  pos: number[];
  a: number;
}

export interface StateFlags {
  avoidance: boolean;
  conflict: boolean;
  infeasible: boolean;
  paused: boolean;
}

export interface StatePayload {
  tick: number;
  t: number;
  q: number[];
  qdot: number[];
  bounds_lo: number[];
  bounds_hi: number[];
  ee_pose: PoseMsg;
  ee_err: number;
  target: number[];
  parts: PartMsg[];
  human: Record<string, number[]>;
  links: PoseMsg[];
  taxels: TaxelMsg[];
  flags: StateFlags;
}

export type ServerMessage =
  | { v: number; kind: "state"; seq: number; payload: StatePayload }
  | { v: number; kind: "ack"; seq: number; payload: { command_seq: number; effect_tick: number } }
  | { v: number; kind: "error"; seq: number; payload: { command_seq?: number; reason: string } };

function isFiniteVec(x: unknown, n: number): x is number[] {
  return Array.isArray(x) && x.length === n && x.every((v) => Number.isFinite(v));
}

export function parseServerMessage(raw: string): ServerMessage {
  const msg = JSON.parse(raw);
  if (typeof msg !== "object" || msg === null) throw new Error("not an object");
  if (msg.v !== PROTOCOL_VERSION) throw new Error(`unsupported protocol version ${msg.v}`);
  if (!["state", "ack", "error"].includes(msg.kind)) throw new Error(`unknown kind ${msg.kind}`);
  if (typeof msg.seq !== "number") throw new Error("missing seq");
  if (msg.kind === "state") {
    const p = msg.payload;
    if (
      typeof p?.tick !== "number" ||
      !Array.isArray(p.q) ||
      !Array.isArray(p.bounds_lo) ||
      !Array.isArray(p.bounds_hi) ||
      !isFiniteVec(p.ee_pose?.position, 3) ||
      typeof p.flags?.paused !== "boolean"
    ) {
      throw new Error("malformed state payload");
    }
  }
  return msg as ServerMessage;
}

let commandSeq = 0;

export function nextCommandSeq(): number {
  return ++commandSeq;
}

export function commandMessage(seq: number, op: string, extra: Record<string, unknown> = {}): string {
  return JSON.stringify({ v: PROTOCOL_VERSION, kind: "command", seq, payload: { op, ...extra } });
}

export function setKeypointCommand(seq: number, label: string, pos: number[]): string {
  return commandMessage(seq, "set_keypoint", { label, pos });
}

export function setValenceCommand(seq: number, label: string, theta: number): string {
  return commandMessage(seq, "set_valence", { label, theta });
}

/** Sliders clamp to [-1, 1] in 0.05 steps. */
export function clampValence(theta: number): number {
  const clamped = Math.max(-1, Math.min(1, theta));
  return Math.round(clamped / 0.05) * 0.05;
}

export const KEYPOINT_LABELS = [
  "head",
  "shoulder_l",
  "shoulder_r",
  "elbow_l",
  "elbow_r",
  "hand_l",
  "hand_r",
  "hip_l",
  "hip_r",
  "knee_l",
  "knee_r",
  "ankle_l",
  "ankle_r",
] as const;
