"""Streaming surface-trace filter.

Turns a raw stylus-tip stream into a sparse cloud of robust per-surface-point
representatives: inlier gating against the dense model, an in/out-of-bounds
state machine with re-entry hysteresis for lift-off excursions, normal-based
projection filtering, and component-wise medians.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyTraceError
from .geometry import NeighborIndex, PointCloud


@dataclass(frozen=True)
class TraceConfig:
    """Geometric thresholds of the filter (mm). Defaults are the tuned values."""

    inlier_mm: float = 10.0
    removal_mm: float = 10.0
    reentry_mm: float = 10.0
    band_mm: float = 3.0


class TraceState(enum.Enum):
    IN_BOUNDS = "in_bounds"
    OUT_OF_BOUNDS = "out_of_bounds"


class EventKind(enum.Enum):
    ACCEPTED = "accepted"
    REJECTED_OUTLIER = "rejected_outlier"
    WENT_OUT_OF_BOUNDS = "went_out_of_bounds"
    REENTRY_CANDIDATE_SET = "reentry_candidate_set"
    RESUMED_IN_BOUNDS = "resumed_in_bounds"


@dataclass(frozen=True)
class TraceEvent:
    kind: EventKind
    model_index: int | None = None
    removed_count: int | None = None


class TraceSession:
    """Single-writer filter session over one dense model cloud.

    `ingest` must be called in stream order; snapshots such as
    `representative_points` may be taken between ingests.
    """

    def __init__(self, model: PointCloud, config: TraceConfig = TraceConfig(),
                 index: NeighborIndex | None = None):
        if model.normals is None:
            raise ValueError("trace filtering needs a model cloud with normals")
        self.model = model
        self.config = config
        self.index = index if index is not None else NeighborIndex(model)
        self.state = TraceState.IN_BOUNDS
        self.reentry: np.ndarray | None = None
        # model index -> list of accepted points; points are identity-tracked
        # so the removal rule can delete exactly the current-run entries.
        self.associations: dict[int, list[np.ndarray]] = {}
        self.current_run: list[tuple[int, np.ndarray]] = []

    def _link(self, i: int, q: np.ndarray) -> None:
        self.associations.setdefault(i, []).append(q)
        self.current_run.append((i, q))

    def ingest(self, q) -> TraceEvent:
        q = np.asarray(q, dtype=np.float64).reshape(3)
        if not np.isfinite(q).all():
            raise ValueError("trace sample has non-finite coordinates")
        i_star, dist = self.index.nearest(q)
        inlier = dist <= self.config.inlier_mm

        if self.state is TraceState.IN_BOUNDS:
            if inlier:
                self._link(i_star, q.copy())
                return TraceEvent(EventKind.ACCEPTED, model_index=i_star)
            # Fault: purge current-run points near the offending sample.
            removed = 0
            keep: list[tuple[int, np.ndarray]] = []
            for i, p in self.current_run:
                if np.linalg.norm(p - q) <= self.config.removal_mm:
                    bucket = self.associations[i]
                    self.associations[i] = [x for x in bucket if x is not p]
                    if not self.associations[i]:
                        del self.associations[i]
                    removed += 1
                else:
                    keep.append((i, p))
            self.current_run = keep
            self.state = TraceState.OUT_OF_BOUNDS
            self.reentry = None
            return TraceEvent(EventKind.WENT_OUT_OF_BOUNDS, removed_count=removed)

        # Out of bounds.
        if inlier and self.reentry is None:
            self.reentry = q.copy()
            return TraceEvent(EventKind.REENTRY_CANDIDATE_SET)
        if (inlier and self.reentry is not None
                and np.linalg.norm(q - self.reentry) > self.config.reentry_mm):
            self.state = TraceState.IN_BOUNDS
            self.reentry = None
            self.current_run = []
            self._link(i_star, q.copy())
            return TraceEvent(EventKind.RESUMED_IN_BOUNDS, model_index=i_star)
        return TraceEvent(EventKind.REJECTED_OUTLIER)

    def ingest_all(self, points) -> list[TraceEvent]:
        return [self.ingest(q) for q in np.asarray(points, dtype=np.float64)]

    def representative_points(self) -> PointCloud:
        """One robust point per associated model index, in model-index order."""
        if not self.associations:
            raise EmptyTraceError("no accepted trace points")
        assert self.model.normals is not None
        reps = []
        for i in sorted(self.associations):
            pts = np.array(self.associations[i])
            kept = project_filter(pts, self.model.normals[i], self.config.band_mm)
            reps.append(np.median(kept, axis=0))
        return PointCloud(np.array(reps))


def project_filter(points, normal, band_mm: float = 3.0) -> np.ndarray:
    """Drop points whose projection onto `normal` rises > band_mm above the lowest.

    The minimal-projection point always survives, so the output is non-empty.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if len(pts) == 0:
        raise ValueError("project_filter needs at least one point")
    n = np.asarray(normal, dtype=np.float64).reshape(3)
    proj = pts @ n
    return pts[proj - proj.min() <= band_mm]
