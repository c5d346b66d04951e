// Connection/session state as a pure reducer: the rendered scene is always a
// received state message, so reconnecting resumes from the live state with no
// client-side drift.

import type { ServerMessage, StatePayload } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

export interface UiSession {
  status: ConnectionStatus;
  lastState: StatePayload | null;
  lastSeq: number;
  statesReceived: number;
  lastError: string | null;
}

export const initialSession: UiSession = {
  status: "connecting",
  lastState: null,
  lastSeq: -1,
  statesReceived: 0,
  lastError: null,
};

export type SessionEvent =
  | { type: "open" }
  | { type: "close" }
  | { type: "message"; message: ServerMessage };

export function reduceSession(s: UiSession, event: SessionEvent): UiSession {
  switch (event.type) {
    case "open":
      // fresh connection: server seq numbering may restart
      return { ...s, status: "connected", lastSeq: -1, lastError: null };
    case "close":
      return { ...s, status: "disconnected" };
    case "message": {
      const m = event.message;
      if (s.lastSeq >= 0 && m.seq <= s.lastSeq) return s; // stale/out of order
      const next = { ...s, lastSeq: m.seq };
      if (m.kind === "state") {
        next.lastState = m.payload;
        next.statesReceived = s.statesReceived + 1;
      } else if (m.kind === "error") {
        next.lastError = m.payload.reason;
      }
      return next;
    }
  }
}
