"""WebSocket guidance service.

Newline-free JSON messages, one per WebSocket frame, each carrying a "kind"
field. On connect the server announces the active plan and its static
overlay; every incoming "pose" gets exactly one "frame" reply, computed in
arrival order. Malformed messages get an "error" reply and the session stays
open. Units are millimetres on the wire.
"""
from __future__ import annotations

import asyncio
import json
import math

from websockets.asyncio.server import serve as ws_serve

from .geometry import RigidTransform
from .guidance import (GuidanceFrame, InSituOverlay, ToolPose, TrajectoryPlan,
                       guidance_frame, in_situ_overlay)


def _vec(v) -> list[float]:
    return [float(x) for x in v]


def plan_message(plan_id: str, plan: TrajectoryPlan) -> dict:
    return {"kind": "plan", "id": plan_id,
            "skin_entry": _vec(plan.skin_entry),
            "bone_entry": _vec(plan.bone_entry),
            "target": _vec(plan.target),
            "direction": _vec(plan.direction)}


def overlay_message(overlay: InSituOverlay) -> dict:
    return {"kind": "overlay",
            "disc_center": _vec(overlay.disc_center),
            "disc_diameter": overlay.disc_diameter,
            "cylinder_start": _vec(overlay.cylinder_start),
            "cylinder_end": _vec(overlay.cylinder_end),
            "cylinder_diameter": overlay.cylinder_diameter,
            "sphere_center": _vec(overlay.sphere_center),
            "sphere_diameter": overlay.sphere_diameter}


def frame_message(frame: GuidanceFrame) -> dict:
    valid = frame.offsets_valid
    return {"kind": "frame",
            "entry_offset": frame.entry_offset if valid else None,
            "target_offset": frame.target_offset if valid else None,
            "entry_correction": _vec(frame.entry_correction),
            "depth_to_target": frame.depth_to_target,
            "angular_error": frame.angular_error,
            "on_trajectory": frame.on_trajectory,
            "offsets_valid": valid}


def error_message(text: str) -> dict:
    return {"kind": "error", "message": text}


class GuidanceService:
    """Stateless geometry behind the socket: plans in the patient frame."""

    def __init__(self, plans: dict[str, TrajectoryPlan],
                 model_to_patient: RigidTransform | None = None,
                 default_mode: str = "insertion"):
        if not plans:
            raise ValueError("at least one plan is required")
        T = model_to_patient if model_to_patient is not None else RigidTransform.identity()
        self.plans = {pid: TrajectoryPlan(T.apply(p.skin_entry), T.apply(p.bone_entry),
                                          T.apply(p.target))
                      for pid, p in plans.items()}
        self.default_plan_id = next(iter(self.plans))
        self.default_mode = default_mode

    def handle(self, message: dict, active_plan_id: str, mode: str) -> tuple[list[dict], str, str]:
        """Replies plus updated (plan id, mode) for one incoming message."""
        kind = message.get("kind")
        if kind == "pose":
            try:
                pose = ToolPose(message["tip"], message["direction"])
            except (KeyError, TypeError, ValueError) as exc:
                return [error_message(f"bad pose: {exc}")], active_plan_id, mode
            frame = guidance_frame(self.plans[active_plan_id], pose, mode=mode)
            return [frame_message(frame)], active_plan_id, mode
        if kind == "select_plan":
            pid = str(message.get("id"))
            new_mode = str(message.get("mode", mode))
            if pid not in self.plans:
                return [error_message(f"unknown plan: {pid}")], active_plan_id, mode
            if new_mode not in ("marking", "insertion"):
                return [error_message(f"unknown mode: {new_mode}")], active_plan_id, mode
            return self.announce(pid), pid, new_mode
        return [error_message(f"unknown message kind: {kind!r}")], active_plan_id, mode

    def announce(self, plan_id: str) -> list[dict]:
        plan = self.plans[plan_id]
        return [plan_message(plan_id, plan), overlay_message(in_situ_overlay(plan))]


async def _session(service: GuidanceService, websocket) -> None:
    plan_id = service.default_plan_id
    mode = service.default_mode
    for msg in service.announce(plan_id):
        await websocket.send(json.dumps(msg))
    async for raw in websocket:
        try:
            message = json.loads(raw)
            if not isinstance(message, dict):
                raise ValueError("message must be a JSON object")
        except (json.JSONDecodeError, ValueError) as exc:
            await websocket.send(json.dumps(error_message(f"malformed message: {exc}")))
            continue
        replies, plan_id, mode = service.handle(message, plan_id, mode)
        for msg in replies:
            await websocket.send(json.dumps(msg))


async def serve_guidance(service: GuidanceService, host: str = "127.0.0.1",
                         port: int = 8765, ready: asyncio.Event | None = None) -> None:
    """Run the service until cancelled. `ready` is set once listening."""
    async with ws_serve(lambda ws: _session(service, ws), host, port):
        if ready is not None:
            ready.set()
        await asyncio.Future()
