// Live telemetry panels mirroring the run logs: keypoint distances with PPS
// activations and the 0.2 trigger line, a joint's velocity inside its adaptive
// bounds band, and the end-effector error. Ring buffers keep the last 30 s.

import uPlot from "uplot";

import type { StatePayload } from "./protocol.js";
import { AlignedRing } from "./ring.js";

const TRIGGER = 0.2;
const WINDOW_S = 30;

function dist(a: number[], b: number[]): number {
  return Math.hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

function makePlot(
  container: HTMLElement,
  title: string,
  series: uPlot.Series[],
  height: number,
  bands?: uPlot.Band[],
): uPlot {
  const opts: uPlot.Options = {
    title,
    width: container.clientWidth || 520,
    height,
    scales: { x: { time: false } },
    series: [{ label: "t [s]" }, ...series],
    bands,
    legend: { show: true },
    cursor: { show: false },
  };
  return new uPlot(opts, [[], ...series.map(() => [])] as uPlot.AlignedData, container);
}

export class TelemetryPlots {
  private distRing = new AlignedRing(5, WINDOW_S);
  private velRing = new AlignedRing(3, WINDOW_S);
  private errRing = new AlignedRing(1, WINDOW_S);
  private distPlot: uPlot;
  private velPlot: uPlot;
  private errPlot: uPlot;
  private joint = 1;
  private dirty = false;

  constructor(container: HTMLElement, private nJoints: number) {
    const panel = (id: string) => {
      const div = document.createElement("div");
      div.id = id;
      container.appendChild(div);
      return div;
    };
    this.distPlot = makePlot(
      panel("plot-dist"),
      "distance to EE [m] / PPS activation",
      [
        { label: "hand_r", stroke: "#ff8800", width: 1.5 },
        { label: "head", stroke: "#cc44cc", width: 1.5 },
        { label: "a_hand", stroke: "#00cc44", width: 1 },
        { label: "a_forearm", stroke: "#88aa00", width: 1 },
        { label: "trigger", stroke: "#44ff77", dash: [4, 4], width: 1 },
      ],
      190,
    );
    this.velPlot = makePlot(
      panel("plot-vel"),
      `joint ${this.joint} velocity [deg/s] and bounds`,
      [
        { label: "qdot", stroke: "#66bbff", width: 1.5 },
        { label: "lo", stroke: "#335577", width: 1 },
        { label: "hi", stroke: "#335577", width: 1 },
      ],
      190,
      [{ series: [3, 2], fill: "rgba(80,140,200,0.18)" }],
    );
    this.errPlot = makePlot(
      panel("plot-err"),
      "EE position error [mm]",
      [{ label: "err", stroke: "#ff5555", width: 1.5 }],
      160,
    );
  }

  setJoint(j: number) {
    if (j >= 0 && j < this.nJoints && j !== this.joint) {
      this.joint = j;
      this.velRing.clear();
    }
  }

  get selectedJoint(): number {
    return this.joint;
  }

  push(state: StatePayload) {
    const ee = state.ee_pose.position;
    const apps: Record<string, number> = {};
    for (const p of state.parts) apps[p.name] = p.a_pps;
    this.distRing.push(state.t, [
      state.human.hand_r ? dist(state.human.hand_r, ee) : null,
      state.human.head ? dist(state.human.head, ee) : null,
      apps.hand ?? 0,
      apps.forearm ?? 0,
      TRIGGER,
    ]);
    const j = this.joint;
    const deg = 180 / Math.PI;
    this.velRing.push(state.t, [
      state.qdot[j] * deg,
      state.bounds_lo[j] * deg,
      state.bounds_hi[j] * deg,
    ]);
    this.errRing.push(state.t, [state.ee_err * 1000]);
    this.dirty = true;
  }

  /** Called from the animation loop; redraws only when new data arrived. */
  render() {
    if (!this.dirty) return;
    this.dirty = false;
    this.distPlot.setData(this.distRing.data() as uPlot.AlignedData);
    this.velPlot.setData(this.velRing.data() as uPlot.AlignedData);
    this.errPlot.setData(this.errRing.data() as uPlot.AlignedData);
  }
}
