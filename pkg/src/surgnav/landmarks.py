"""Closed-form rigid landmark registration.

Solves the point-to-point least-squares alignment with the SVD-based
analytical solution (rigid variant, scale fixed to 1), with the usual sign
correction so the recovered rotation is always proper.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLandmarksError
from .geometry import RigidTransform, as_points

# Fixed digitisation order enforced by the CLI so landmark files are
# interchangeable between the simulator and the registration commands.
CANONICAL_LANDMARKS = (
    "right_intertragal_notch",
    "left_intertragal_notch",
    "right_lateral_canthus",
    "left_lateral_canthus",
    "right_medial_canthus",
    "left_medial_canthus",
)


@dataclass(frozen=True)
class LandmarkSet:
    labels: tuple[str, ...]
    positions: np.ndarray

    def __post_init__(self):
        pts = as_points(self.positions)
        if len(self.labels) != len(pts):
            raise ValueError("labels and positions must have equal length")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "positions", pts)

    def reordered(self, labels) -> "LandmarkSet":
        lookup = {lab: i for i, lab in enumerate(self.labels)}
        missing = [lab for lab in labels if lab not in lookup]
        if missing:
            raise DegenerateLandmarksError(f"missing landmarks: {missing}")
        idx = [lookup[lab] for lab in labels]
        return LandmarkSet(tuple(labels), self.positions[idx])


def _check_configuration(pts: np.ndarray) -> None:
    if len(pts) < 3:
        raise DegenerateLandmarksError("need at least 3 landmarks")
    centered = pts - pts.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    if s[1] < 1e-6 * max(s[0], 1.0):
        raise DegenerateLandmarksError("landmarks are (near-)collinear")


def solve_rigid(source: np.ndarray, target: np.ndarray) -> RigidTransform:
    """Least-squares rigid transform mapping matched source points to target.

    Also used as the inner solver for ICP updates, where the inputs are
    correspondence pairs rather than named landmarks.
    """
    src = as_points(source)
    tgt = as_points(target)
    if src.shape != tgt.shape:
        raise ValueError("source and target must be matched point-for-point")
    src_c = src.mean(axis=0)
    tgt_c = tgt.mean(axis=0)
    H = (src - src_c).T @ (tgt - tgt_c)
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    t = tgt_c - R @ src_c
    return RigidTransform(R, t)


def register_landmarks(source: LandmarkSet, target: LandmarkSet) -> tuple[RigidTransform, float]:
    """Align source landmarks to target; returns (transform, FRE).

    FRE is the root-mean-square residual after alignment.
    """
    if source.labels != target.labels:
        target = target.reordered(source.labels)
    if len(source.positions) != len(target.positions):
        raise DegenerateLandmarksError("landmark sets differ in size")
    _check_configuration(source.positions)
    _check_configuration(target.positions)
    T = solve_rigid(source.positions, target.positions)
    residuals = T.apply(source.positions) - target.positions
    fre = float(np.sqrt(np.mean(np.sum(residuals ** 2, axis=1))))
    return T, fre
