// Pure HUD state: what the 2-D feedback canvas should show for the latest
// service-computed frame. No guidance math happens here; the numbers come
// straight off the wire.

import type { FrameMessage, Vec3 } from "./protocol.js";
import { dot, norm, planeBasis } from "./vec.js";

export interface HudConfig {
  pxPerMm: number;
  staleAfterMs: number;
}

export const DEFAULT_HUD: HudConfig = {
  pxPerMm: 4,
  staleAfterMs: 500,
};

export type DisplayMode = "tool_tracking" | "in_situ" | "both";

export interface HudState {
  // Circle radii are proportional to the plane offsets; null while the
  // tool line is too oblique for the offsets to mean anything.
  entryCircleRadiusPx: number | null;
  targetCircleRadiusPx: number | null;
  // Unit arrow in screen coordinates (x right, y down) along the in-plane
  // correction direction, with its length tied to the entry circle.
  arrowDirPx: [number, number] | null;
  arrowLengthPx: number;
  depthText: string;
  angleText: string;
  aligned: boolean;
  offsetsValid: boolean;
  stale: boolean;
}

function fixed(value: number, digits: number, unit: string): string {
  return `${value.toFixed(digits)} ${unit}`;
}

export function hudState(frame: FrameMessage, planDirection: Vec3, nowMs: number,
                         frameReceivedMs: number,
                         config: HudConfig = DEFAULT_HUD): HudState {
  const valid = frame.offsets_valid && frame.entry_offset !== null
    && frame.target_offset !== null;
  let entryRadius: number | null = null;
  let targetRadius: number | null = null;
  let arrowDir: [number, number] | null = null;
  let arrowLength = 0;
  if (valid) {
    entryRadius = (frame.entry_offset as number) * config.pxPerMm;
    targetRadius = (frame.target_offset as number) * config.pxPerMm;
    const [u, v] = planeBasis(planDirection);
    // Screen y grows downward, the basis v points up.
    const sx = dot(frame.entry_correction, u);
    const sy = -dot(frame.entry_correction, v);
    const len = Math.hypot(sx, sy);
    if (len > 1e-9) {
      arrowDir = [sx / len, sy / len];
      arrowLength = entryRadius;
    }
  }
  return {
    entryCircleRadiusPx: entryRadius,
    targetCircleRadiusPx: targetRadius,
    arrowDirPx: arrowDir,
    arrowLengthPx: arrowLength,
    depthText: fixed(frame.depth_to_target, 1, "mm"),
    angleText: fixed(frame.angular_error, 1, "deg"),
    aligned: frame.on_trajectory,
    offsetsValid: frame.offsets_valid,
    stale: nowMs - frameReceivedMs > config.staleAfterMs,
  };
}

export function correctionIsUnit(correction: Vec3): boolean {
  return Math.abs(norm(correction) - 1) < 1e-6;
}
