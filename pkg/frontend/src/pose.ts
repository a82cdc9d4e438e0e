// Steering reducer: input events to a sequence of bounded pose increments.
//
// The service is authoritative for all guidance; this module only moves the
// virtual catheter. Every emitted pose differs from its predecessor by at
// most `translateStepMm` of translation or `tiltStepDeg` of tilt, so larger
// gestures (a long drag) unroll into several increments, each sent over the
// socket in order.

import type { Vec3 } from "./protocol.js";
import { add, normalize, planeBasis, rotateAround, scale } from "./vec.js";

export interface ToolPose {
  tip: Vec3;
  direction: Vec3;
}

export interface SteerConfig {
  pxPerMm: number;
  translateStepMm: number;
  tiltStepDeg: number;
}

export const DEFAULT_STEER: SteerConfig = {
  pxPerMm: 4,
  translateStepMm: 1,
  tiltStepDeg: 1,
};

export type SteerEvent =
  // One scroll step advances the tip along the tool direction; negative
  // steps retract.
  | { type: "scroll"; steps: number }
  // Lateral drag in the view plane perpendicular to the tool direction,
  // in pixels; converted to mm through pxPerMm.
  | { type: "drag"; dxPx: number; dyPx: number }
  // One tilt key press: pitch rotates around the screen-right axis, yaw
  // around the screen-up axis.
  | { type: "tilt"; axis: "pitch" | "yaw"; sign: 1 | -1 };

export function makePose(tip: Vec3, direction: Vec3): ToolPose {
  return { tip, direction: normalize(direction) };
}

function translationIncrements(pose: ToolPose, offset: Vec3, stepMm: number): ToolPose[] {
  const distance = Math.hypot(offset[0], offset[1], offset[2]);
  if (distance < 1e-12) return [];
  const n = Math.max(1, Math.ceil(distance / stepMm - 1e-9));
  const poses: ToolPose[] = [];
  let current = pose;
  for (let i = 1; i <= n; i++) {
    const tip = add(pose.tip, scale(offset, i / n));
    current = { tip, direction: current.direction };
    poses.push(current);
  }
  return poses;
}

// Apply one input event; returns every intermediate pose to transmit, in
// order. An empty array means no pose message goes out (idle quiescence).
export function applySteer(pose: ToolPose, event: SteerEvent,
                           config: SteerConfig = DEFAULT_STEER): ToolPose[] {
  switch (event.type) {
    case "scroll": {
      const offset = scale(pose.direction, event.steps * config.translateStepMm);
      return translationIncrements(pose, offset, config.translateStepMm);
    }
    case "drag": {
      const [u, v] = planeBasis(pose.direction);
      const dxMm = event.dxPx / config.pxPerMm;
      const dyMm = event.dyPx / config.pxPerMm;
      const offset = add(scale(u, dxMm), scale(v, -dyMm));
      return translationIncrements(pose, offset, config.translateStepMm);
    }
    case "tilt": {
      const [u, v] = planeBasis(pose.direction);
      const axis = event.axis === "pitch" ? u : v;
      const direction = normalize(rotateAround(pose.direction, axis,
                                               event.sign * config.tiltStepDeg));
      return [{ tip: pose.tip, direction }];
    }
  }
}
