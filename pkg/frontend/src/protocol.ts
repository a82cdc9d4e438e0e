// Wire protocol of the guidance service: one JSON object per WebSocket
// frame, discriminated by "kind". Millimetres on the wire.

export type Vec3 = [number, number, number];

export interface PlanMessage {
  kind: "plan";
  id: string;
  skin_entry: Vec3;
  bone_entry: Vec3;
  target: Vec3;
  direction: Vec3;
}

export interface OverlayMessage {
  kind: "overlay";
  disc_center: Vec3;
  disc_diameter: number;
  cylinder_start: Vec3;
  cylinder_end: Vec3;
  cylinder_diameter: number;
  sphere_center: Vec3;
  sphere_diameter: number;
}

export interface FrameMessage {
  kind: "frame";
  entry_offset: number | null;
  target_offset: number | null;
  entry_correction: Vec3;
  depth_to_target: number;
  angular_error: number;
  on_trajectory: boolean;
  offsets_valid: boolean;
}

export interface ErrorMessage {
  kind: "error";
  message: string;
}

export type ServerMessage = PlanMessage | OverlayMessage | FrameMessage | ErrorMessage;

export interface PoseMessage {
  kind: "pose";
  tip: Vec3;
  direction: Vec3;
}

export interface SelectPlanMessage {
  kind: "select_plan";
  id: string;
  mode?: "marking" | "insertion";
}

export type ClientMessage = PoseMessage | SelectPlanMessage;

function isVec3(v: unknown): v is Vec3 {
  return Array.isArray(v) && v.length === 3 && v.every((x) => typeof x === "number");
}

function isNumberOrNull(v: unknown): v is number | null {
  return v === null || typeof v === "number";
}

// Parse one incoming frame; null for anything that is not a well-formed
// server message (the UI shows a protocol warning but keeps the session).
export function parseServerMessage(raw: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const m = obj as Record<string, unknown>;
  switch (m.kind) {
    case "plan":
      if (typeof m.id === "string" && isVec3(m.skin_entry) && isVec3(m.bone_entry)
          && isVec3(m.target) && isVec3(m.direction)) {
        return m as unknown as PlanMessage;
      }
      return null;
    case "overlay":
      if (isVec3(m.disc_center) && typeof m.disc_diameter === "number"
          && isVec3(m.cylinder_start) && isVec3(m.cylinder_end)
          && typeof m.cylinder_diameter === "number"
          && isVec3(m.sphere_center) && typeof m.sphere_diameter === "number") {
        return m as unknown as OverlayMessage;
      }
      return null;
    case "frame":
      if (isNumberOrNull(m.entry_offset) && isNumberOrNull(m.target_offset)
          && isVec3(m.entry_correction) && typeof m.depth_to_target === "number"
          && typeof m.angular_error === "number"
          && typeof m.on_trajectory === "boolean"
          && typeof m.offsets_valid === "boolean") {
        return m as unknown as FrameMessage;
      }
      return null;
    case "error":
      if (typeof m.message === "string") return m as unknown as ErrorMessage;
      return null;
    default:
      return null;
  }
}

export function serializeClientMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}
