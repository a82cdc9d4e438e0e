"""Core 3-D geometry: point clouds, rigid transforms, voxel grids, and line fits.

All lengths are millimetres. Angles are degrees at API boundaries and radians
internally. Everything here is immutable after construction and safe to share
between threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateInputError

_ORTHO_TOL = 1e-9
_UNIT_TOL = 1e-9


def as_points(points) -> np.ndarray:
    """Coerce to a float64 (N, 3) array and require finite values."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected (N, 3) points, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("points contain non-finite coordinates")
    return arr


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    if n < 1e-12:
        raise DegenerateInputError("cannot normalize a (near-)zero vector")
    return v / n


def angle_between_deg(u, v) -> float:
    """Angle between two vectors in degrees, in [0, 180]."""
    u = normalize(u)
    v = normalize(v)
    return float(np.degrees(np.arccos(np.clip(np.dot(u, v), -1.0, 1.0))))


@dataclass(frozen=True)
class RigidTransform:
    """Proper rigid motion p' = R @ p + t."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not (np.isfinite(R).all() and np.isfinite(t).all()):
            raise ValueError("non-finite transform")
        if np.abs(R @ R.T - np.eye(3)).max() > 1e-8:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > 1e-8:
            raise ValueError("rotation must be proper (det +1)")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)
        R.setflags(write=False)
        t.setflags(write=False)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(np.eye(3), np.zeros(3))

    @staticmethod
    def from_axis_angle(axis, angle_deg: float, translation=(0.0, 0.0, 0.0)) -> "RigidTransform":
        axis = normalize(axis)
        a = np.radians(angle_deg)
        K = np.array([[0, -axis[2], axis[1]],
                      [axis[2], 0, -axis[0]],
                      [-axis[1], axis[0], 0]])
        R = np.eye(3) + np.sin(a) * K + (1 - np.cos(a)) * (K @ K)
        return RigidTransform(R, np.asarray(translation, dtype=np.float64))

    def apply(self, points) -> np.ndarray:
        """Map points (N, 3) or a single point (3,) into the target frame."""
        pts = np.asarray(points, dtype=np.float64)
        single = pts.ndim == 1
        out = np.atleast_2d(pts) @ self.rotation.T + self.translation
        return out[0] if single else out

    def rotate(self, vectors) -> np.ndarray:
        """Rotate direction vectors (no translation)."""
        vecs = np.asarray(vectors, dtype=np.float64)
        single = vecs.ndim == 1
        out = np.atleast_2d(vecs) @ self.rotation.T
        return out[0] if single else out

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Transform applying `other` first, then `self`."""
        return RigidTransform(self.rotation @ other.rotation,
                              self.rotation @ other.translation + self.translation)

    def inverse(self) -> "RigidTransform":
        return RigidTransform(self.rotation.T, -self.rotation.T @ self.translation)

    def rotation_angle_deg(self) -> float:
        """Magnitude of the rotation, degrees.

        atan2 of the skew part keeps full precision for tiny angles, where
        the plain arccos-of-trace form loses half the significant digits.
        """
        R = self.rotation
        s = 0.5 * np.linalg.norm([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
        c = (np.trace(R) - 1.0) / 2.0
        return float(np.degrees(np.arctan2(s, np.clip(c, -1.0, 1.0))))


@dataclass(frozen=True)
class PointCloud:
    """Ordered set of 3-D points in mm, optionally with unit normals."""

    points: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self):
        pts = as_points(self.points)
        object.__setattr__(self, "points", pts)
        pts.setflags(write=False)
        if self.normals is not None:
            nrm = np.asarray(self.normals, dtype=np.float64)
            if nrm.shape != pts.shape:
                raise ValueError("normals must match points in shape")
            lengths = np.linalg.norm(nrm, axis=1)
            if np.abs(lengths - 1.0).max() > 1e-6:
                raise ValueError("normals must be unit length")
            object.__setattr__(self, "normals", nrm)
            nrm.setflags(write=False)

    def __len__(self) -> int:
        return len(self.points)

    def transformed(self, T: RigidTransform) -> "PointCloud":
        normals = None if self.normals is None else T.rotate(self.normals)
        return PointCloud(T.apply(self.points), normals)


class NeighborIndex:
    """Exact nearest-neighbor index over a point cloud.

    Ties are broken toward the lowest point index so downstream pipelines
    stay deterministic.
    """

    def __init__(self, cloud: PointCloud):
        if len(cloud) == 0:
            raise DegenerateInputError("cannot index an empty cloud")
        self.cloud = cloud
        self._tree = cKDTree(cloud.points)

    def nearest(self, q) -> tuple[int, float]:
        q = np.asarray(q, dtype=np.float64).reshape(3)
        if not np.isfinite(q).all():
            raise ValueError("query point has non-finite coordinates")
        k = min(8, len(self.cloud))
        dists, idxs = self._tree.query(q, k=k)
        dists = np.atleast_1d(dists)
        idxs = np.atleast_1d(idxs)
        best = dists[0]
        tied = idxs[dists == best]
        return int(tied.min()), float(best)

    def nearest_many(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized nearest query: (indices, distances) for (N, 3) input."""
        k = min(2, len(self.cloud))
        dists, idxs = self._tree.query(pts, k=k)
        if k == 1:
            return idxs.astype(np.intp), dists
        tie = dists[:, 0] == dists[:, 1]
        out_idx = idxs[:, 0].copy()
        if tie.any():
            # Rare exact ties: fall back to the scalar path for determinism.
            for row in np.flatnonzero(tie):
                out_idx[row], _ = self.nearest(pts[row])
        return out_idx.astype(np.intp), dists[:, 0]


@dataclass(frozen=True)
class Line3:
    """Infinite line through `origin` along unit `direction`."""

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=np.float64).reshape(3)
        d = np.asarray(self.direction, dtype=np.float64).reshape(3)
        if abs(np.linalg.norm(d) - 1.0) > 1e-6:
            raise ValueError("direction must be unit length")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)

    def point_at(self, s: float) -> np.ndarray:
        return self.origin + s * self.direction


def voxel_downsample(cloud: PointCloud, voxel: float) -> PointCloud:
    """Collapse each occupied voxel to the centroid of its points.

    Voxel keys are floor(p / voxel); normals are averaged and renormalized
    when present. An empty cloud passes through unchanged.
    """
    if voxel <= 0:
        raise ValueError("voxel size must be positive")
    if len(cloud) == 0:
        return cloud
    keys = np.floor(cloud.points / voxel).astype(np.int64)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    counts = np.bincount(inverse, minlength=len(uniq)).astype(np.float64)
    centroids = np.zeros((len(uniq), 3))
    for axis in range(3):
        centroids[:, axis] = np.bincount(inverse, weights=cloud.points[:, axis],
                                         minlength=len(uniq)) / counts
    normals = None
    if cloud.normals is not None:
        sums = np.zeros((len(uniq), 3))
        for axis in range(3):
            sums[:, axis] = np.bincount(inverse, weights=cloud.normals[:, axis],
                                        minlength=len(uniq))
        degenerate = np.linalg.norm(sums, axis=1) < 1e-12
        sums[degenerate] = (1.0, 0.0, 0.0)  # fully cancelled normals: arbitrary unit
        normals = sums / np.linalg.norm(sums, axis=1, keepdims=True)
    return PointCloud(centroids, normals)


def fit_line(cloud: PointCloud) -> Line3:
    """Total-least-squares line through a cloud.

    Origin is the centroid; the direction is the principal axis of the
    centered covariance, with its sign chosen so it points from the first
    stored point toward the last.
    """
    pts = cloud.points
    if len(pts) < 2:
        raise DegenerateInputError("need at least 2 points to fit a line")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    if np.linalg.norm(centered, axis=1).max() < 1e-12:
        raise DegenerateInputError("all points coincident")
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    direction = vt[0]
    if np.dot(direction, pts[-1] - pts[0]) < 0:
        direction = -direction
    return Line3(centroid, direction / np.linalg.norm(direction))
