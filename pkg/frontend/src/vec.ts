import type { Vec3 } from "./protocol.js";

export function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function scale(v: Vec3, s: number): Vec3 {
  return [v[0] * s, v[1] * s, v[2] * s];
}

export function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function norm(v: Vec3): number {
  return Math.hypot(v[0], v[1], v[2]);
}

export function normalize(v: Vec3): Vec3 {
  const n = norm(v);
  if (n < 1e-12) throw new Error("cannot normalize a (near-)zero vector");
  return scale(v, 1 / n);
}

// Rodrigues rotation of v around unit axis by angle in degrees.
export function rotateAround(v: Vec3, axis: Vec3, angleDeg: number): Vec3 {
  const a = (angleDeg * Math.PI) / 180;
  const k = normalize(axis);
  const cosA = Math.cos(a);
  const sinA = Math.sin(a);
  const kxv = cross(k, v);
  const kdv = dot(k, v);
  return [
    v[0] * cosA + kxv[0] * sinA + k[0] * kdv * (1 - cosA),
    v[1] * cosA + kxv[1] * sinA + k[1] * kdv * (1 - cosA),
    v[2] * cosA + kxv[2] * sinA + k[2] * kdv * (1 - cosA),
  ];
}

// Deterministic orthonormal basis (u, v) of the plane perpendicular to a
// direction; u is the screen-right axis, v the screen-up axis.
export function planeBasis(direction: Vec3): [Vec3, Vec3] {
  const d = normalize(direction);
  let up: Vec3 = [0, 0, 1];
  if (Math.abs(dot(d, up)) > 0.9) up = [0, 1, 0];
  const u = normalize(cross(up, d));
  const v = cross(d, u);
  return [u, v];
}
