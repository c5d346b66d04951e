// Pure 3D math for dragging keypoint handles: a pointer ray is intersected
// with a camera-facing plane anchored at the grab point.

export interface Vec3 {
  x: number;
  y: number;
  z: number;
}

export function sub(a: Vec3, b: Vec3): Vec3 {
  return { x: a.x - b.x, y: a.y - b.y, z: a.z - b.z };
}

export function dot(a: Vec3, b: Vec3): number {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

export function norm(a: Vec3): number {
  return Math.sqrt(dot(a, a));
}

export function normalize(a: Vec3): Vec3 {
  const n = norm(a);
  if (n === 0) throw new Error("cannot normalize zero vector");
  return { x: a.x / n, y: a.y / n, z: a.z / n };
}

/**
 * Intersection of a ray with a plane, or null when the ray is parallel or
 * points away from it.
 */
export function intersectRayPlane(
  origin: Vec3,
  direction: Vec3,
  planePoint: Vec3,
  planeNormal: Vec3,
): Vec3 | null {
  const denom = dot(direction, planeNormal);
  if (Math.abs(denom) < 1e-12) return null;
  const s = dot(sub(planePoint, origin), planeNormal) / denom;
  if (s < 0) return null;
  return {
    x: origin.x + s * direction.x,
    y: origin.y + s * direction.y,
    z: origin.z + s * direction.z,
  };
}

/** Drag plane through the grabbed point, facing the camera. */
export function dragPlaneNormal(cameraPosition: Vec3, grabPoint: Vec3): Vec3 {
  return normalize(sub(cameraPosition, grabPoint));
}
