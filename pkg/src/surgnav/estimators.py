"""Scikit-learn style estimator facades over the registration algorithms.

These wrap the functional core so the algorithms compose with sklearn
pipelines and tooling (`get_params`/`set_params`, fitted attributes with a
trailing underscore, `check_is_fitted`). Inputs are (N, 3) arrays or
`PointCloud`s; `transform` maps points through the fitted rigid transform.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .geometry import PointCloud, RigidTransform, as_points
from .icp import ScoreConfig, multiscale_refine, scale_schedule
from .landmarks import LandmarkSet, register_landmarks
from .tracing import TraceConfig, TraceSession


def _as_cloud(X, normals=None) -> PointCloud:
    if isinstance(X, PointCloud):
        return X
    return PointCloud(as_points(X), normals)


class LandmarkRegistration(TransformerMixin, BaseEstimator):
    """Closed-form rigid alignment of matched landmark sets.

    `fit(X, y)` aligns source landmarks X to target landmarks y (matched by
    index, or by label when both are `LandmarkSet`s). The fitted transform
    maps source-frame points into the target frame.

    Attributes
    ----------
    transform_ : RigidTransform
    fre_ : float
        Root-mean-square landmark residual after alignment (mm).
    """

    def fit(self, X, y):
        if isinstance(X, LandmarkSet) and isinstance(y, LandmarkSet):
            source, target = X, y
        else:
            source = LandmarkSet(tuple(f"p{i}" for i in range(len(X))), as_points(X))
            target = LandmarkSet(source.labels, as_points(y))
        self.transform_, self.fre_ = register_landmarks(source, target)
        return self

    def transform(self, X):
        check_is_fitted(self, "transform_")
        return self.transform_.apply(as_points(X))


class SurfaceTraceFilter(TransformerMixin, BaseEstimator):
    """Streaming outlier-rejecting trace filter as a transformer.

    `fit` takes the dense model cloud (with normals); `transform` runs a raw
    stylus stream through the state machine and returns the robust
    representative cloud. `session_` keeps the full per-point bookkeeping,
    and `events_` the per-sample decisions of the last `transform`.
    """

    def __init__(self, inlier_mm=10.0, removal_mm=10.0, reentry_mm=10.0, band_mm=3.0):
        self.inlier_mm = inlier_mm
        self.removal_mm = removal_mm
        self.reentry_mm = reentry_mm
        self.band_mm = band_mm

    def _config(self) -> TraceConfig:
        return TraceConfig(self.inlier_mm, self.removal_mm, self.reentry_mm, self.band_mm)

    def fit(self, X, y=None):
        self.session_ = TraceSession(_as_cloud(X), self._config())
        return self

    def transform(self, X):
        check_is_fitted(self, "session_")
        self.events_ = self.session_.ingest_all(as_points(X))
        return self.session_.representative_points().points


class MultiscaleIcpRegistration(TransformerMixin, BaseEstimator):
    """Coarse-to-fine ICP surface registration with scored acceptance.

    `fit(X, y)` registers the traced cloud X onto the dense model cloud y,
    starting from `init` (a RigidTransform, identity by default).

    Attributes
    ----------
    transform_ : RigidTransform
        Best traced-to-model transform found.
    score_ : AlignmentScore
    audit_ : list[ScaleRecord]
        Per-scale record of the refinement.
    """

    def __init__(self, k_corr=3.0, coarse_mm=10.0, fine_mm=0.1, levels=15,
                 close_mm=5.0, fitness_weight=0.4, rmse_weight=0.6,
                 min_fitness=0.7, max_rmse_mm=5.0, max_iterations=200, tol=1e-6):
        self.k_corr = k_corr
        self.coarse_mm = coarse_mm
        self.fine_mm = fine_mm
        self.levels = levels
        self.close_mm = close_mm
        self.fitness_weight = fitness_weight
        self.rmse_weight = rmse_weight
        self.min_fitness = min_fitness
        self.max_rmse_mm = max_rmse_mm
        self.max_iterations = max_iterations
        self.tol = tol

    def fit(self, X, y, init: RigidTransform | None = None):
        traced = _as_cloud(X)
        model = _as_cloud(y)
        schedule = scale_schedule(self.coarse_mm, self.fine_mm, self.levels)
        config = ScoreConfig(self.close_mm, self.fitness_weight, self.rmse_weight,
                             self.min_fitness, self.max_rmse_mm)
        self.transform_, self.score_, self.audit_ = multiscale_refine(
            traced, model, init if init is not None else RigidTransform.identity(),
            k_corr=self.k_corr, schedule=schedule, score_config=config,
            max_iterations=self.max_iterations, tol=self.tol)
        return self

    def transform(self, X):
        check_is_fitted(self, "transform_")
        return self.transform_.apply(as_points(X))
