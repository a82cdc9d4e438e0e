import { describe, expect, it } from "vitest";

import { DEFAULT_HUD, hudState } from "../src/hud.js";
import type { FrameMessage, Vec3 } from "../src/protocol.js";
import { planeBasis } from "../src/vec.js";

const PLAN_DIRECTION: Vec3 = [0.3, 0.2, -0.8];

function frame(overrides: Partial<FrameMessage> = {}): FrameMessage {
  return {
    kind: "frame",
    entry_offset: 3,
    target_offset: 5,
    entry_correction: [1, 0, 0],
    depth_to_target: 42.0,
    angular_error: 1.2,
    on_trajectory: false,
    offsets_valid: true,
    ...overrides,
  };
}

describe("circle geometry", () => {
  it("zero offsets render zero-radius circles in the aligned state", () => {
    const s = hudState(frame({ entry_offset: 0, target_offset: 0, on_trajectory: true }),
                       PLAN_DIRECTION, 0, 0);
    expect(s.entryCircleRadiusPx).toBe(0);
    expect(s.targetCircleRadiusPx).toBe(0);
    expect(s.aligned).toBe(true);
  });

  it("a 3 mm entry offset at the default 4 px/mm gives a 12 px radius", () => {
    const s = hudState(frame(), PLAN_DIRECTION, 0, 0);
    expect(s.entryCircleRadiusPx).toBe(12);
    expect(s.targetCircleRadiusPx).toBe(20);
  });

  it("radii scale with the configured px/mm", () => {
    const s = hudState(frame(), PLAN_DIRECTION, 0, 0, { ...DEFAULT_HUD, pxPerMm: 10 });
    expect(s.entryCircleRadiusPx).toBe(30);
  });

  it("invalid offsets render no circles and no arrow", () => {
    const s = hudState(frame({ entry_offset: null, target_offset: null,
                               offsets_valid: false }), PLAN_DIRECTION, 0, 0);
    expect(s.entryCircleRadiusPx).toBeNull();
    expect(s.targetCircleRadiusPx).toBeNull();
    expect(s.arrowDirPx).toBeNull();
    expect(s.offsetsValid).toBe(false);
  });
});

describe("correction arrow", () => {
  it("points along the in-plane correction in screen coordinates", () => {
    const [u, v] = planeBasis(PLAN_DIRECTION.map((x) => x / Math.hypot(...PLAN_DIRECTION)) as Vec3);
    // A correction exactly along the screen-right axis.
    const s = hudState(frame({ entry_correction: u }), PLAN_DIRECTION, 0, 0);
    expect(s.arrowDirPx).not.toBeNull();
    expect(s.arrowDirPx![0]).toBeCloseTo(1, 9);
    expect(s.arrowDirPx![1]).toBeCloseTo(0, 9);
    // A correction along screen-up renders as negative canvas y.
    const s2 = hudState(frame({ entry_correction: v }), PLAN_DIRECTION, 0, 0);
    expect(s2.arrowDirPx![0]).toBeCloseTo(0, 9);
    expect(s2.arrowDirPx![1]).toBeCloseTo(-1, 9);
  });

  it("has unit direction and length tied to the entry circle", () => {
    const s = hudState(frame({ entry_correction: [0.6, 0.8, 0] }), [0, 0, -1], 0, 0);
    expect(Math.hypot(s.arrowDirPx![0], s.arrowDirPx![1])).toBeCloseTo(1, 9);
    expect(s.arrowLengthPx).toBe(s.entryCircleRadiusPx);
  });

  it("projects arbitrary corrections consistently with the plane basis", () => {
    const d: Vec3 = [0.1, -0.4, 0.9];
    const n = Math.hypot(...d);
    const unit: Vec3 = [d[0] / n, d[1] / n, d[2] / n];
    const [u, v] = planeBasis(unit);
    const c: Vec3 = [
      0.3 * u[0] - 0.7 * v[0],
      0.3 * u[1] - 0.7 * v[1],
      0.3 * u[2] - 0.7 * v[2],
    ];
    const len = Math.hypot(0.3, 0.7);
    const s = hudState(frame({ entry_correction: [c[0] / len, c[1] / len, c[2] / len] }),
                       d, 0, 0);
    expect(s.arrowDirPx![0]).toBeCloseTo(0.3 / len, 9);
    expect(s.arrowDirPx![1]).toBeCloseTo(0.7 / len, 9);
  });
});

describe("readouts", () => {
  it("shows depth to 0.1 mm", () => {
    expect(hudState(frame({ depth_to_target: 42.0 }), PLAN_DIRECTION, 0, 0).depthText)
      .toBe("42.0 mm");
    expect(hudState(frame({ depth_to_target: 12.34 }), PLAN_DIRECTION, 0, 0).depthText)
      .toBe("12.3 mm");
    expect(hudState(frame({ depth_to_target: -0.25 }), PLAN_DIRECTION, 0, 0).depthText)
      .toBe("-0.3 mm");
  });

  it("reflects on_trajectory as the color state", () => {
    expect(hudState(frame({ on_trajectory: true }), PLAN_DIRECTION, 0, 0).aligned).toBe(true);
    expect(hudState(frame({ on_trajectory: false }), PLAN_DIRECTION, 0, 0).aligned).toBe(false);
  });
});

describe("staleness", () => {
  it("flags frames older than 500 ms", () => {
    expect(hudState(frame(), PLAN_DIRECTION, 1000, 499).stale).toBe(true);
    expect(hudState(frame(), PLAN_DIRECTION, 1000, 501).stale).toBe(false);
    expect(hudState(frame(), PLAN_DIRECTION, 1000, 500).stale).toBe(false);
    expect(hudState(frame(), PLAN_DIRECTION, 1501, 1000).stale).toBe(true);
  });
});
