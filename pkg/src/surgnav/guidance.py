"""Trajectory guidance geometry.

Real-time tool-tracked feedback (entry/target plane offsets, correction
direction, remaining depth, angular error) plus the static in-situ overlay
primitives for a planned trajectory. Everything here is pure geometry; the
serve mode and UI only serialize it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError
from .geometry import Line3, angle_between_deg, normalize

ENTRY_TOLERANCE_MM = 2.0
ANGLE_TOLERANCE_DEG = 2.0
# Tool lines steeper than this relative to the plan give meaningless plane
# intersections; offsets are flagged invalid past it.
MAX_USABLE_ANGLE_DEG = 89.0

ENTRY_DISC_DIAMETER_MM = 6.0
TRAJECTORY_CYLINDER_DIAMETER_MM = 1.0
CYLINDER_SKIN_OVERHANG_MM = 100.0
TARGET_SPHERE_DIAMETER_MM = 4.0


@dataclass(frozen=True)
class TrajectoryPlan:
    """Planned path: skin entry, bone (catheter) entry, and target, in mm."""

    skin_entry: np.ndarray
    bone_entry: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        for name in ("skin_entry", "bone_entry", "target"):
            v = np.asarray(getattr(self, name), dtype=np.float64).reshape(3)
            object.__setattr__(self, name, v)
        if np.linalg.norm(self.target - self.skin_entry) < 1e-9:
            raise ValueError("target must differ from skin entry")
        d = self.direction
        offset = self.bone_entry - self.skin_entry
        lateral = offset - (offset @ d) * d
        if np.linalg.norm(lateral) > 0.5:
            raise ValueError("bone entry must lie on the planned segment (within 0.5 mm)")

    @property
    def direction(self) -> np.ndarray:
        """Unit direction from skin entry toward the target."""
        return normalize(self.target - self.skin_entry)


@dataclass(frozen=True)
class ToolPose:
    tip: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tip", np.asarray(self.tip, dtype=np.float64).reshape(3))
        object.__setattr__(self, "direction", normalize(self.direction))


@dataclass(frozen=True)
class GuidanceFrame:
    entry_offset: float
    target_offset: float
    entry_correction: np.ndarray
    depth_to_target: float
    angular_error: float
    on_trajectory: bool
    offsets_valid: bool = True


@dataclass(frozen=True)
class InSituOverlay:
    """Static overlay primitives: entry disc, trajectory cylinder, target sphere."""

    disc_center: np.ndarray
    disc_diameter: float
    cylinder_start: np.ndarray
    cylinder_end: np.ndarray
    cylinder_diameter: float
    sphere_center: np.ndarray
    sphere_diameter: float


def line_plane_intersection(line: Line3, plane_point, plane_normal) -> np.ndarray:
    """Unique intersection of a line with a plane; errors when near-parallel."""
    plane_point = np.asarray(plane_point, dtype=np.float64).reshape(3)
    n = normalize(plane_normal)
    denom = float(line.direction @ n)
    if abs(denom) <= 1e-9:
        raise DegenerateInputError("line is (near-)parallel to the plane")
    s = float((plane_point - line.origin) @ n) / denom
    return line.point_at(s)


def _in_plane_unit(v: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """Project v into the plane orthogonal to `normal` and normalize.

    Zero in-plane component falls back to a deterministic in-plane axis so
    the correction arrow is always well-defined.
    """
    w = v - (v @ normal) * normal
    norm = np.linalg.norm(w)
    if norm < 1e-12:
        seed = np.array([1.0, 0.0, 0.0])
        if abs(normal @ seed) > 0.9:
            seed = np.array([0.0, 1.0, 0.0])
        w = seed - (seed @ normal) * normal
        norm = np.linalg.norm(w)
    return w / norm


def guidance_frame(plan: TrajectoryPlan, pose: ToolPose, mode: str = "insertion",
                   entry_tol_mm: float = ENTRY_TOLERANCE_MM,
                   angle_tol_deg: float = ANGLE_TOLERANCE_DEG) -> GuidanceFrame:
    """One frame of tool-tracked feedback for the given plan and pose.

    `mode` selects which entry plane the offset circle lives in: the skin
    entry while marking the burr hole, the bone entry during insertion.
    """
    if mode not in ("marking", "insertion"):
        raise ValueError(f"unknown guidance mode: {mode!r}")
    d = plan.direction
    entry_point = plan.skin_entry if mode == "marking" else plan.bone_entry
    angular_error = angle_between_deg(pose.direction, d)
    depth_to_target = float((plan.target - pose.tip) @ d)

    usable = min(angular_error, 180.0 - angular_error) <= MAX_USABLE_ANGLE_DEG
    if not usable:
        return GuidanceFrame(entry_offset=math.nan, target_offset=math.nan,
                             entry_correction=_in_plane_unit(np.zeros(3), d),
                             depth_to_target=depth_to_target,
                             angular_error=angular_error,
                             on_trajectory=False, offsets_valid=False)

    tool_line = Line3(pose.tip, pose.direction)
    entry_hit = line_plane_intersection(tool_line, entry_point, d)
    target_hit = line_plane_intersection(tool_line, plan.target, d)
    entry_offset = float(np.linalg.norm(entry_hit - entry_point))
    target_offset = float(np.linalg.norm(target_hit - plan.target))
    correction = _in_plane_unit(entry_point - entry_hit, d)
    on_trajectory = entry_offset <= entry_tol_mm and angular_error <= angle_tol_deg
    return GuidanceFrame(entry_offset, target_offset, correction, depth_to_target,
                         angular_error, on_trajectory)


def in_situ_overlay(plan: TrajectoryPlan) -> InSituOverlay:
    """Static plan overlay with the standard primitive dimensions."""
    d = plan.direction
    return InSituOverlay(
        disc_center=plan.skin_entry,
        disc_diameter=ENTRY_DISC_DIAMETER_MM,
        cylinder_start=plan.target,
        cylinder_end=plan.skin_entry - CYLINDER_SKIN_OVERHANG_MM * d,
        cylinder_diameter=TRAJECTORY_CYLINDER_DIAMETER_MM,
        sphere_center=plan.target,
        sphere_diameter=TARGET_SPHERE_DIAMETER_MM,
    )
