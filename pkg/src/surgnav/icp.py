"""Point-to-point ICP, alignment scoring, and multiscale coarse-to-fine refinement.

The refinement walks a logarithmic series of voxel sizes, runs ICP at each
scale from the best transform so far, and only accepts a candidate when its
full-resolution score improves on the incumbent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import NeighborIndex, PointCloud, RigidTransform, voxel_downsample
from .landmarks import solve_rigid


@dataclass(frozen=True)
class ScoreConfig:
    """Scoring and rejection constants (tuned defaults)."""

    close_mm: float = 5.0
    fitness_weight: float = 0.4
    rmse_weight: float = 0.6
    min_fitness: float = 0.7
    max_rmse_mm: float = 5.0

    @property
    def rmse_scale_mm(self) -> float:
        # Residual normalizer: twice the close-correspondence radius.
        return 2.0 * self.close_mm


@dataclass(frozen=True)
class AlignmentScore:
    fitness: float
    rmse: float
    score: float
    rejected: bool


@dataclass(frozen=True)
class IcpResult:
    delta: RigidTransform
    fitness: float
    rmse: float
    iterations: int

    @property
    def degenerate(self) -> bool:
        return math.isnan(self.rmse)


@dataclass(frozen=True)
class ScaleRecord:
    voxel_mm: float
    iterations: int
    fitness: float
    rmse: float
    score: float
    accepted: bool


def scale_schedule(coarse_mm: float = 10.0, fine_mm: float = 0.1, levels: int = 15) -> np.ndarray:
    """Strictly decreasing voxel sizes, log-spaced with exact endpoints."""
    if levels < 2 or coarse_mm <= fine_mm or fine_mm <= 0:
        raise ValueError("invalid schedule parameters")
    ratio = (fine_mm / coarse_mm) ** (1.0 / (levels - 1))
    voxels = coarse_mm * ratio ** np.arange(levels, dtype=np.float64)
    voxels[0] = coarse_mm
    voxels[-1] = fine_mm
    return voxels


def score_alignment(traced: PointCloud, model_index: NeighborIndex,
                    T: RigidTransform, config: ScoreConfig = ScoreConfig()) -> AlignmentScore:
    """Score a candidate transform of the traced cloud against the model.

    fitness = fraction of traced points with a model neighbour within
    `close_mm`; rmse over those pairs; score blends both, or 0 when the
    alignment fails the fitness/rmse gate.
    """
    if len(traced) == 0:
        raise ValueError("traced cloud must be non-empty")
    pts = T.apply(traced.points)
    _, dists = model_index.nearest_many(pts)
    close = dists <= config.close_mm
    n_close = int(close.sum())
    if n_close == 0:
        return AlignmentScore(fitness=0.0, rmse=math.inf, score=0.0, rejected=True)
    fitness = n_close / len(traced)
    rmse = float(np.sqrt(np.mean(dists[close] ** 2)))
    rejected = fitness < config.min_fitness or rmse > config.max_rmse_mm
    if rejected:
        return AlignmentScore(fitness, rmse, 0.0, True)
    score = (config.fitness_weight * fitness
             + config.rmse_weight * (1.0 - rmse / config.rmse_scale_mm))
    return AlignmentScore(fitness, rmse, score, False)


def icp_point_to_point(source: PointCloud, target: PointCloud, init: RigidTransform,
                       max_corr_mm: float, target_index: NeighborIndex | None = None,
                       max_iterations: int = 200, tol: float = 1e-6) -> IcpResult:
    """Classic point-to-point ICP returning the incremental transform.

    Alternates nearest-neighbour correspondence (within `max_corr_mm`) with
    the closed-form rigid update, stopping at the iteration cap or when both
    fitness and rmse change by less than `tol` between iterations.
    """
    if len(source) == 0 or len(target) == 0:
        raise ValueError("clouds must be non-empty")
    if max_corr_mm <= 0:
        raise ValueError("max_corr_mm must be positive")
    if target_index is None:
        target_index = NeighborIndex(target)

    T = init
    prev_fitness = math.inf
    prev_rmse = math.inf
    fitness = 0.0
    rmse = math.nan
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        moved = T.apply(source.points)
        idx, dists = target_index.nearest_many(moved)
        matched = dists <= max_corr_mm
        n = int(matched.sum())
        if n == 0:
            if iterations == 1:
                return IcpResult(RigidTransform.identity(), 0.0, math.nan, 0)
            break
        fitness = n / len(source)
        rmse = float(np.sqrt(np.mean(dists[matched] ** 2)))
        if abs(fitness - prev_fitness) < tol and abs(rmse - prev_rmse) < tol:
            break
        prev_fitness, prev_rmse = fitness, rmse
        update = solve_rigid(moved[matched], target.points[idx[matched]])
        T = update.compose(T)
    delta = T.compose(init.inverse())
    return IcpResult(delta, fitness, rmse, iterations)


def multiscale_refine(traced: PointCloud, model: PointCloud, T0: RigidTransform,
                      k_corr: float = 3.0, schedule: np.ndarray | None = None,
                      score_config: ScoreConfig = ScoreConfig(),
                      max_iterations: int = 200,
                      tol: float = 1e-6) -> tuple[RigidTransform, AlignmentScore, list[ScaleRecord]]:
    """Coarse-to-fine ICP refinement with best-so-far acceptance.

    Every candidate is scored at full resolution; a scale's result is taken
    only when it strictly improves the incumbent score. Returns the winning
    traced-to-model transform, its score, and a per-scale audit trail. The
    model-to-patient transform is the inverse of the winner.
    """
    if schedule is None:
        schedule = scale_schedule()
    full_index = NeighborIndex(model)
    best_T = T0
    best = score_alignment(traced, full_index, best_T, score_config)
    records: list[ScaleRecord] = []
    for voxel in schedule:
        src = voxel_downsample(traced, float(voxel))
        tgt = voxel_downsample(model, float(voxel))
        result = icp_point_to_point(src, tgt, best_T, max_corr_mm=k_corr * float(voxel),
                                    max_iterations=max_iterations, tol=tol)
        candidate_T = result.delta.compose(best_T)
        candidate = score_alignment(traced, full_index, candidate_T, score_config)
        accepted = candidate.score > best.score
        records.append(ScaleRecord(float(voxel), result.iterations, candidate.fitness,
                                   candidate.rmse, candidate.score, accepted))
        if accepted:
            best_T = candidate_T
            best = candidate
    return best_T, best, records
