// App wiring: WebSocket session with auto-reconnect, 3D scene, telemetry
// plots, valence sliders, and pause/resume controls.

import {
  KEYPOINT_LABELS,
  clampValence,
  commandMessage,
  nextCommandSeq,
  parseServerMessage,
  setKeypointCommand,
  setValenceCommand,
  type StatePayload,
} from "./protocol.js";
import { ArmScene } from "./scene.js";
import { TelemetryPlots } from "./plots.js";
import { PerKeyThrottle } from "./throttle.js";
import { initialSession, reduceSession, type UiSession } from "./session.js";

const params = new URLSearchParams(location.search);
const HOST = params.get("host") ?? location.hostname ?? "localhost";
const PORT = params.get("port") ?? "8765";
const TICK_MS = 20;

let session: UiSession = initialSession;
let ws: WebSocket | null = null;
const dragThrottle = new PerKeyThrottle(TICK_MS);

const banner = document.getElementById("banner")!;
const flagsEl = document.getElementById("flags")!;
const sceneEl = document.getElementById("scene")!;
const plotsEl = document.getElementById("plots")!;
const slidersEl = document.getElementById("sliders")!;

function send(text: string) {
  if (ws && ws.readyState === WebSocket.OPEN) ws.send(text);
}

const scene = new ArmScene(sceneEl, {
  onKeypointDrag(label, pos) {
    if (!dragThrottle.ready(label, performance.now())) return;
    send(setKeypointCommand(nextCommandSeq(), label, pos));
  },
});

let plots: TelemetryPlots | null = null;

function updateBanner() {
  banner.textContent =
    session.status === "connected"
      ? `connected to ws://${HOST}:${PORT}`
      : session.status === "connecting"
        ? `connecting to ws://${HOST}:${PORT} ...`
        : "disconnected - frame frozen, retrying";
  banner.className = session.status;
}

function updateFlags(state: StatePayload) {
  const f = state.flags;
  const parts = state.parts
    .map((p) => `${p.name} a=${p.a_pps.toFixed(2)}`)
    .join("  ");
  flagsEl.textContent =
    `tick ${state.tick}  t=${state.t.toFixed(2)}s  err=${(state.ee_err * 1000).toFixed(1)}mm  ` +
    `${parts}  ${f.avoidance ? "AVOIDANCE" : ""} ${f.conflict ? "CONFLICT" : ""}` +
    `${f.infeasible ? " INFEASIBLE" : ""}${f.paused ? " PAUSED" : ""}`;
}

function onState(state: StatePayload) {
  if (!plots) {
    plots = new TelemetryPlots(plotsEl, state.q.length);
    const sel = document.getElementById("joint-select") as HTMLSelectElement;
    for (let j = 0; j < state.q.length; j++) {
      const opt = document.createElement("option");
      opt.value = String(j);
      opt.textContent = `joint ${j}`;
      if (j === plots.selectedJoint) opt.selected = true;
      sel.appendChild(opt);
    }
    sel.onchange = () => plots?.setJoint(Number(sel.value));
  }
  scene.update(state);
  plots.push(state);
  updateFlags(state);
}

function connect() {
  ws = new WebSocket(`ws://${HOST}:${PORT}`);
  session = reduceSession(session, { type: "open" } as never);
  session = { ...session, status: "connecting" };
  updateBanner();
  ws.onopen = () => {
    session = reduceSession(session, { type: "open" });
    updateBanner();
  };
  ws.onmessage = (ev) => {
    try {
      const msg = parseServerMessage(ev.data as string);
      const before = session.lastState;
      session = reduceSession(session, { type: "message", message: msg });
      if (session.lastState && session.lastState !== before) onState(session.lastState);
      if (msg.kind === "error") console.warn("bridge error:", msg.payload.reason);
    } catch (e) {
      console.warn("unparseable message", e);
    }
  };
  ws.onclose = () => {
    session = reduceSession(session, { type: "close" });
    updateBanner();
    setTimeout(connect, 1000);
  };
  ws.onerror = () => ws?.close();
}

function buildSliders() {
  for (const label of KEYPOINT_LABELS) {
    const row = document.createElement("div");
    row.className = "slider-row";
    const name = document.createElement("span");
    name.textContent = label;
    const value = document.createElement("span");
    value.textContent = "0.00";
    value.className = "value";
    const input = document.createElement("input");
    input.type = "range";
    input.min = "-1";
    input.max = "1";
    input.step = "0.05";
    input.value = "0";
    input.oninput = () => {
      value.textContent = Number(input.value).toFixed(2);
    };
    input.onchange = () => {
      const theta = clampValence(Number(input.value));
      send(setValenceCommand(nextCommandSeq(), label, theta));
    };
    row.append(name, input, value);
    slidersEl.appendChild(row);
  }
}

document.getElementById("pause")!.onclick = () =>
  send(commandMessage(nextCommandSeq(), "pause"));
document.getElementById("resume")!.onclick = () =>
  send(commandMessage(nextCommandSeq(), "resume"));
document.getElementById("reset")!.onclick = () =>
  send(commandMessage(nextCommandSeq(), "reset"));

buildSliders();
connect();

function animate() {
  requestAnimationFrame(animate);
  scene.render();
  plots?.render();
}
animate();
