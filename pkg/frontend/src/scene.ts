// 3D view: arm links, activation-tinted taxels, draggable keypoint handles,
// and aggregate avoidance arrows. Pure display: everything comes from the
// last received state message.

import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";

import { dragPlaneNormal, intersectRayPlane, type Vec3 } from "./drag.js";
import type { StatePayload } from "./protocol.js";

const TAXEL_NEUTRAL = new THREE.Color(0x8899aa);
const TAXEL_HOT = new THREE.Color(0x00cc44);
const KEYPOINT_COLORS: Record<string, number> = {
  head: 0xcc44cc,
  hand_l: 0xff8800,
  hand_r: 0xff8800,
};
const ARROW_MAX_LENGTH = 0.3;

export interface SceneCallbacks {
  onKeypointDrag(label: string, pos: [number, number, number]): void;
  onDragEnd?(label: string): void;
}

interface DragState {
  label: string;
  planePoint: Vec3;
  planeNormal: Vec3;
  moved: boolean;
}

function v3(p: number[] | THREE.Vector3): THREE.Vector3 {
  return p instanceof THREE.Vector3 ? p : new THREE.Vector3(p[0], p[1], p[2]);
}

export class ArmScene {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private controls: OrbitControls;
  private raycaster = new THREE.Raycaster();

  private linkSegments: THREE.Mesh[] = [];
  private jointBalls: THREE.Mesh[] = [];
  private taxelMeshes: THREE.Mesh[] = [];
  private keypointMeshes = new Map<string, THREE.Mesh>();
  private arrows = new Map<string, THREE.ArrowHelper>();
  private targetMarker: THREE.Mesh;
  private eeMarker: THREE.Mesh;

  private drag: DragState | null = null;

  constructor(
    private container: HTMLElement,
    private callbacks: SceneCallbacks,
  ) {
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setSize(container.clientWidth, container.clientHeight);
    container.appendChild(this.renderer.domElement);

    this.camera = new THREE.PerspectiveCamera(
      50,
      container.clientWidth / container.clientHeight,
      0.01,
      20,
    );
    this.camera.up.set(0, 0, 1); // robot frame is z-up
    this.camera.position.set(1.4, -1.1, 0.9);

    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.target.set(0, 0, 0.4);
    this.controls.update();

    this.scene.background = new THREE.Color(0x101418);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.7));
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(2, -1, 3);
    this.scene.add(sun);

    const grid = new THREE.GridHelper(2, 20, 0x334455, 0x222c33);
    grid.rotation.x = Math.PI / 2; // into the x-y plane of the robot frame
    this.scene.add(grid);
    this.scene.add(new THREE.AxesHelper(0.25));

    this.targetMarker = new THREE.Mesh(
      new THREE.OctahedronGeometry(0.02),
      new THREE.MeshBasicMaterial({ color: 0xffdd33, wireframe: true }),
    );
    this.scene.add(this.targetMarker);
    this.eeMarker = new THREE.Mesh(
      new THREE.SphereGeometry(0.015),
      new THREE.MeshBasicMaterial({ color: 0x66bbff }),
    );
    this.scene.add(this.eeMarker);

    const el = this.renderer.domElement;
    el.addEventListener("pointerdown", (e) => this.onPointerDown(e));
    el.addEventListener("pointermove", (e) => this.onPointerMove(e));
    el.addEventListener("pointerup", (e) => this.onPointerUp(e));
    window.addEventListener("resize", () => this.onResize());
  }

  private onResize() {
    const w = this.container.clientWidth;
    const h = this.container.clientHeight;
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
    this.renderer.setSize(w, h);
  }

  private pointerRay(e: PointerEvent): { origin: Vec3; direction: Vec3 } {
    const rect = this.renderer.domElement.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((e.clientX - rect.left) / rect.width) * 2 - 1,
      -((e.clientY - rect.top) / rect.height) * 2 + 1,
    );
    this.raycaster.setFromCamera(ndc, this.camera);
    const { origin, direction } = this.raycaster.ray;
    return { origin, direction };
  }

  private onPointerDown(e: PointerEvent) {
    this.pointerRay(e);
    const handles = [...this.keypointMeshes.values()].filter((m) => m.visible);
    const hits = this.raycaster.intersectObjects(handles);
    if (hits.length === 0) return;
    const mesh = hits[0].object as THREE.Mesh;
    const label = mesh.userData.label as string;
    const planePoint = { x: mesh.position.x, y: mesh.position.y, z: mesh.position.z };
    this.drag = {
      label,
      planePoint,
      planeNormal: dragPlaneNormal(this.camera.position, planePoint),
      moved: false,
    };
    this.controls.enabled = false;
    this.renderer.domElement.setPointerCapture(e.pointerId);
  }

  private onPointerMove(e: PointerEvent) {
    if (!this.drag) return;
    const ray = this.pointerRay(e);
    const hit = intersectRayPlane(ray.origin, ray.direction, this.drag.planePoint, this.drag.planeNormal);
    if (!hit) return;
    this.drag.moved = true;
    const mesh = this.keypointMeshes.get(this.drag.label);
    if (mesh) mesh.position.set(hit.x, hit.y, hit.z); // local echo until next state
    this.callbacks.onKeypointDrag(this.drag.label, [hit.x, hit.y, hit.z]);
  }

  private onPointerUp(e: PointerEvent) {
    if (this.drag) {
      if (this.drag.moved) this.callbacks.onDragEnd?.(this.drag.label);
      this.drag = null;
    }
    this.controls.enabled = true;
    this.renderer.domElement.releasePointerCapture?.(e.pointerId);
  }

  get draggedLabel(): string | null {
    return this.drag?.label ?? null;
  }

  private segmentMesh(i: number): THREE.Mesh {
    while (this.linkSegments.length <= i) {
      const mesh = new THREE.Mesh(
        new THREE.CylinderGeometry(0.022, 0.022, 1, 12),
        new THREE.MeshStandardMaterial({ color: 0x5a6a7a, roughness: 0.5 }),
      );
      this.scene.add(mesh);
      this.linkSegments.push(mesh);
      const ball = new THREE.Mesh(
        new THREE.SphereGeometry(0.028, 16, 12),
        new THREE.MeshStandardMaterial({ color: 0x8090a0 }),
      );
      this.scene.add(ball);
      this.jointBalls.push(ball);
    }
    return this.linkSegments[i];
  }

  update(state: StatePayload) {
    // arm segments between consecutive frame origins (base at the root)
    const origins = [new THREE.Vector3(0, 0, 0), ...state.links.map((l) => v3(l.position))];
    for (let i = 0; i < origins.length - 1; i++) {
      const seg = this.segmentMesh(i);
      const a = origins[i];
      const b = origins[i + 1];
      const len = a.distanceTo(b);
      this.jointBalls[i].position.copy(b);
      if (len < 1e-4) {
        seg.visible = false;
        continue;
      }
      seg.visible = true;
      seg.position.copy(a).addScaledVector(b.clone().sub(a), 0.5);
      seg.quaternion.setFromUnitVectors(
        new THREE.Vector3(0, 1, 0),
        b.clone().sub(a).normalize(),
      );
      seg.scale.set(1, len, 1);
    }

    // taxels tinted by activation
    while (this.taxelMeshes.length < state.taxels.length) {
      const mesh = new THREE.Mesh(
        new THREE.SphereGeometry(0.008, 8, 6),
        new THREE.MeshBasicMaterial(),
      );
      this.scene.add(mesh);
      this.taxelMeshes.push(mesh);
    }
    state.taxels.forEach((t, i) => {
      const mesh = this.taxelMeshes[i];
      mesh.visible = true;
      mesh.position.set(t.pos[0], t.pos[1], t.pos[2]);
      (mesh.material as THREE.MeshBasicMaterial).color
        .copy(TAXEL_NEUTRAL)
        .lerp(TAXEL_HOT, Math.min(1, Math.max(0, t.a)));
    });

    // keypoint handles (hidden while occluded, echoed while dragging)
    for (const [label, mesh] of this.keypointMeshes) {
      if (!(label in state.human)) mesh.visible = false;
    }
    for (const [label, pos] of Object.entries(state.human)) {
      let mesh = this.keypointMeshes.get(label);
      if (!mesh) {
        mesh = new THREE.Mesh(
          new THREE.SphereGeometry(0.03, 16, 12),
          new THREE.MeshStandardMaterial({ color: KEYPOINT_COLORS[label] ?? 0x44aaff }),
        );
        mesh.userData.label = label;
        this.scene.add(mesh);
        this.keypointMeshes.set(label, mesh);
      }
      mesh.visible = true;
      if (this.drag?.label !== label) mesh.position.set(pos[0], pos[1], pos[2]);
    }

    // aggregate arrows scaled by activation
    for (const part of state.parts) {
      let arrow = this.arrows.get(part.name);
      if (!arrow) {
        arrow = new THREE.ArrowHelper(
          new THREE.Vector3(1, 0, 0),
          new THREE.Vector3(),
          0.1,
          0xff3333,
          0.03,
          0.02,
        );
        this.scene.add(arrow);
        this.arrows.set(part.name, arrow);
      }
      if (part.a_pps > 0 && part.p_c && part.n_c) {
        arrow.visible = true;
        arrow.position.set(part.p_c[0], part.p_c[1], part.p_c[2]);
        arrow.setDirection(v3(part.n_c).normalize());
        arrow.setLength(Math.max(0.02, part.a_pps * ARROW_MAX_LENGTH), 0.03, 0.02);
      } else {
        arrow.visible = false;
      }
    }

    this.targetMarker.position.set(state.target[0], state.target[1], state.target[2]);
    this.eeMarker.position.set(
      state.ee_pose.position[0],
      state.ee_pose.position[1],
      state.ee_pose.position[2],
    );
  }

  render() {
    this.controls.update();
    this.renderer.render(this.scene, this.camera);
  }
}
