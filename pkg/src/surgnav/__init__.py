"""Surgical-navigation registration, guidance, and accuracy-metrics toolkit."""

from .geometry import Line3, NeighborIndex, PointCloud, RigidTransform, fit_line, voxel_downsample
from .guidance import (GuidanceFrame, InSituOverlay, ToolPose, TrajectoryPlan,
                       guidance_frame, in_situ_overlay, line_plane_intersection)
from .icp import AlignmentScore, IcpResult, icp_point_to_point, multiscale_refine, scale_schedule, score_alignment
from .landmarks import LandmarkSet, register_landmarks
from .metrics import (MetricsReport, PairedSample, PlacementResult,
                      collapse_medians, placement_metrics, wilcoxon_signed_rank)
from .estimators import LandmarkRegistration, MultiscaleIcpRegistration, SurfaceTraceFilter
from .phantom import Phantom, SimConfig, generate_phantom, simulate_insertion, simulate_trace
from .pipeline import PipelineConfig, RegistrationOutcome, run_registration
from .tracing import TraceConfig, TraceEvent, TraceSession, project_filter

__version__ = "0.1.0"
