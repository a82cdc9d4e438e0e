"""End-to-end registration pipeline: landmarks -> trace filter -> multiscale ICP."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentRejectedError
from .geometry import PointCloud, RigidTransform
from .icp import ScoreConfig, multiscale_refine, scale_schedule
from .io import transform_to_dict
from .landmarks import LandmarkSet, register_landmarks
from .tracing import TraceConfig, TraceSession


@dataclass(frozen=True)
class PipelineConfig:
    """Thresholds for the full registration pipeline (tuned defaults)."""

    trace: TraceConfig = field(default_factory=TraceConfig)
    score: ScoreConfig = field(default_factory=ScoreConfig)
    k_corr: float = 3.0
    coarse_mm: float = 10.0
    fine_mm: float = 0.1
    levels: int = 15
    max_iterations: int = 200
    tol: float = 1e-6


@dataclass(frozen=True)
class RegistrationOutcome:
    model_to_patient: RigidTransform
    patient_to_model: RigidTransform
    fre: float
    fitness: float
    rmse: float
    score: float
    audit: list

    def to_dict(self) -> dict:
        out = transform_to_dict(self.model_to_patient)
        out["patient_to_model"] = transform_to_dict(self.patient_to_model)
        out["fre"] = self.fre
        out["score"] = {"fitness": self.fitness, "rmse": self.rmse, "score": self.score}
        out["audit"] = [{"voxel_mm": r.voxel_mm, "iterations": r.iterations,
                         "fitness": r.fitness, "rmse": r.rmse, "score": r.score,
                         "accepted": r.accepted} for r in self.audit]
        return out


def run_registration(model: PointCloud, model_landmarks: LandmarkSet,
                     digitized_landmarks: LandmarkSet, trace_points: np.ndarray,
                     config: PipelineConfig = PipelineConfig()) -> RegistrationOutcome:
    """Full registration: returns the model-to-patient transform and audit.

    Digitised landmarks and the trace stream are in the patient (world)
    frame; the model cloud and its landmarks are in the model frame. Raises
    the module error types on degenerate landmarks, an empty trace, or a
    rejected final alignment.
    """
    T0, fre = register_landmarks(digitized_landmarks, model_landmarks)

    session = TraceSession(model, config.trace)
    session.ingest_all(T0.apply(np.asarray(trace_points, dtype=np.float64)))
    traced = session.representative_points()

    schedule = scale_schedule(config.coarse_mm, config.fine_mm, config.levels)
    T_ref, score, audit = multiscale_refine(
        traced, model, RigidTransform.identity(), k_corr=config.k_corr,
        schedule=schedule, score_config=config.score,
        max_iterations=config.max_iterations, tol=config.tol)
    if score.rejected:
        raise AlignmentRejectedError(
            f"final alignment rejected (fitness {score.fitness:.3f}, rmse {score.rmse:.3f} mm)")

    patient_to_model = T_ref.compose(T0)
    return RegistrationOutcome(
        model_to_patient=patient_to_model.inverse(),
        patient_to_model=patient_to_model,
        fre=fre, fitness=score.fitness, rmse=score.rmse, score=score.score,
        audit=audit)
