import { describe, expect, it } from "vitest";

import { parseServerMessage, serializeClientMessage } from "../src/protocol.js";

describe("parseServerMessage", () => {
  it("parses a plan announcement", () => {
    const raw = JSON.stringify({
      kind: "plan", id: "R1",
      skin_entry: [40, 25, 60], bone_entry: [38, 24, 57],
      target: [10, 10, 15], direction: [0, 0, -1],
    });
    const msg = parseServerMessage(raw);
    expect(msg).not.toBeNull();
    expect(msg!.kind).toBe("plan");
    if (msg!.kind === "plan") expect(msg!.id).toBe("R1");
  });

  it("parses an overlay with all primitive fields", () => {
    const msg = parseServerMessage(JSON.stringify({
      kind: "overlay",
      disc_center: [1, 2, 3], disc_diameter: 6,
      cylinder_start: [0, 0, 0], cylinder_end: [0, 0, 100], cylinder_diameter: 1,
      sphere_center: [0, 0, 0], sphere_diameter: 4,
    }));
    expect(msg).not.toBeNull();
    if (msg!.kind === "overlay") {
      expect(msg!.disc_diameter).toBe(6);
      expect(msg!.sphere_diameter).toBe(4);
    }
  });

  it("parses frames with null offsets (oblique tool)", () => {
    const msg = parseServerMessage(JSON.stringify({
      kind: "frame", entry_offset: null, target_offset: null,
      entry_correction: [1, 0, 0], depth_to_target: 10,
      angular_error: 89.5, on_trajectory: false, offsets_valid: false,
    }));
    expect(msg).not.toBeNull();
    if (msg!.kind === "frame") {
      expect(msg!.entry_offset).toBeNull();
      expect(msg!.offsets_valid).toBe(false);
    }
  });

  it("parses error replies", () => {
    expect(parseServerMessage('{"kind": "error", "message": "unknown plan: X"}'))
      .toEqual({ kind: "error", message: "unknown plan: X" });
  });

  it("rejects non-JSON, non-objects, and unknown kinds", () => {
    expect(parseServerMessage("this is not json")).toBeNull();
    expect(parseServerMessage("42")).toBeNull();
    expect(parseServerMessage('{"kind": "telemetry"}')).toBeNull();
  });

  it("rejects structurally broken messages of a known kind", () => {
    expect(parseServerMessage('{"kind": "plan", "id": "R1"}')).toBeNull();
    expect(parseServerMessage(JSON.stringify({
      kind: "frame", entry_offset: "big", target_offset: null,
      entry_correction: [1, 0, 0], depth_to_target: 10,
      angular_error: 1, on_trajectory: false, offsets_valid: true,
    }))).toBeNull();
    expect(parseServerMessage(JSON.stringify({
      kind: "plan", id: "R1",
      skin_entry: [40, 25], bone_entry: [38, 24, 57],
      target: [10, 10, 15], direction: [0, 0, -1],
    }))).toBeNull();
  });
});

describe("serializeClientMessage", () => {
  it("emits wire-shaped pose and select_plan messages", () => {
    expect(JSON.parse(serializeClientMessage(
      { kind: "pose", tip: [1, 2, 3], direction: [0, 0, 1] })))
      .toEqual({ kind: "pose", tip: [1, 2, 3], direction: [0, 0, 1] });
    expect(JSON.parse(serializeClientMessage(
      { kind: "select_plan", id: "L1", mode: "marking" })))
      .toEqual({ kind: "select_plan", id: "L1", mode: "marking" });
  });
});
