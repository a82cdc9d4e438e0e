// 3-D context view: the phantom surface cloud plus the in-situ overlay
// primitives, built verbatim from the "overlay" message. Dimensions on the
// wire are diameters in mm; three.js wants radii.

import * as THREE from "three";

import type { OverlayMessage, PlanMessage, Vec3 } from "./protocol.js";
import { norm } from "./vec.js";

const DISC_SEGMENTS = 48;
const CYLINDER_SEGMENTS = 24;
const SPHERE_SEGMENTS = 24;

function toVector(v: Vec3): THREE.Vector3 {
  return new THREE.Vector3(v[0], v[1], v[2]);
}

export function buildPointCloud(points: Float32Array, pointSize = 0.8): THREE.Points {
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.BufferAttribute(points, 3));
  const material = new THREE.PointsMaterial({ size: pointSize, color: 0x8899aa });
  return new THREE.Points(geometry, material);
}

export function buildOverlay(overlay: OverlayMessage): THREE.Group {
  const group = new THREE.Group();
  group.name = "in_situ_overlay";

  const disc = new THREE.Mesh(
    new THREE.CircleGeometry(overlay.disc_diameter / 2, DISC_SEGMENTS),
    new THREE.MeshBasicMaterial({ color: 0x33cc66, side: THREE.DoubleSide }));
  disc.name = "entry_disc";
  disc.position.copy(toVector(overlay.disc_center));
  group.add(disc);

  const start = toVector(overlay.cylinder_start);
  const end = toVector(overlay.cylinder_end);
  const length = start.distanceTo(end);
  const cylinder = new THREE.Mesh(
    new THREE.CylinderGeometry(overlay.cylinder_diameter / 2,
                               overlay.cylinder_diameter / 2,
                               length, CYLINDER_SEGMENTS),
    new THREE.MeshBasicMaterial({ color: 0x3366cc }));
  cylinder.name = "trajectory_cylinder";
  cylinder.position.copy(start.clone().add(end).multiplyScalar(0.5));
  // CylinderGeometry extends along +y; align it with the segment.
  cylinder.quaternion.setFromUnitVectors(
    new THREE.Vector3(0, 1, 0),
    end.clone().sub(start).normalize());
  group.add(cylinder);

  const sphere = new THREE.Mesh(
    new THREE.SphereGeometry(overlay.sphere_diameter / 2, SPHERE_SEGMENTS, SPHERE_SEGMENTS),
    new THREE.MeshBasicMaterial({ color: 0xcc3333 }));
  sphere.name = "target_sphere";
  sphere.position.copy(toVector(overlay.sphere_center));
  group.add(sphere);

  const discPlaneNormal = end.clone().sub(start);
  if (discPlaneNormal.length() > 1e-9) {
    // CircleGeometry faces +z; orient the disc perpendicular to the path.
    disc.quaternion.setFromUnitVectors(new THREE.Vector3(0, 0, 1),
                                       discPlaneNormal.normalize());
  }
  return group;
}

export function buildTool(tip: Vec3, direction: Vec3, lengthMm = 120): THREE.Group {
  const group = new THREE.Group();
  group.name = "virtual_catheter";
  const d = toVector(direction).normalize();
  const tipVec = toVector(tip);
  const tail = tipVec.clone().sub(d.clone().multiplyScalar(lengthMm));
  const geometry = new THREE.BufferGeometry().setFromPoints([tail, tipVec]);
  const line = new THREE.Line(geometry, new THREE.LineBasicMaterial({ color: 0xffaa00 }));
  line.name = "catheter_shaft";
  group.add(line);
  const tipMarker = new THREE.Mesh(
    new THREE.SphereGeometry(1.0, 12, 12),
    new THREE.MeshBasicMaterial({ color: 0xffaa00 }));
  tipMarker.name = "catheter_tip";
  tipMarker.position.copy(tipVec);
  group.add(tipMarker);
  return group;
}

export function planSegmentLength(plan: PlanMessage): number {
  return norm([
    plan.target[0] - plan.skin_entry[0],
    plan.target[1] - plan.skin_entry[1],
    plan.target[2] - plan.skin_entry[2],
  ]);
}
