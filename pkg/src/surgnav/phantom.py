"""Synthetic head-phantom ground truth.

A superellipsoid stands in for the printed head: it gives an implicit surface
with analytic normals and a trivial interiority test, so every generated
landmark, plan, trace sample, and placement has exact ground truth. All
randomness flows from one seed through named child streams, so outputs are
bit-identical across runs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Line3, PointCloud, RigidTransform, normalize
from .guidance import TrajectoryPlan
from .landmarks import CANONICAL_LANDMARKS, LandmarkSet
from .metrics import PlacementResult

# Semi-axes (mm): x = left/right, y = back/front, z = down/up. The bounding
# box (about 160 x 200 x 140 mm) sits comfortably inside 250 x 250 x 150 mm.
SEMI_AXES = np.array([80.0, 100.0, 70.0])
EXPONENT = 2.5
SURFACE_POINTS = 150_000

# Gaussian surface features (center direction, amplitude mm, width mm). A bare
# superellipsoid is too self-similar to pin down tangential alignment; these
# bumps (nose, brow, frontal bossing, cheekbones, occiput) give the surface
# registration something to grip, like the bony landmarks of a real head.
_FEATURES = (
    ((0.0, 1.0, 0.05), 12.0, 12.0),    # nose
    ((0.35, 0.85, 0.40), 6.0, 15.0),   # right brow
    ((-0.35, 0.85, 0.40), 6.0, 15.0),  # left brow
    ((0.20, 0.45, 0.85), 7.0, 16.0),   # right frontal boss
    ((-0.25, 0.50, 0.80), 7.0, 16.0),  # left frontal boss
    ((0.0, 0.30, 0.95), 5.0, 18.0),    # crown
    ((0.60, 0.70, -0.10), 7.0, 18.0),  # right cheekbone
    ((-0.60, 0.70, -0.10), 7.0, 18.0), # left cheekbone
    ((0.0, -1.0, 0.20), 8.0, 25.0),    # occiput
    # Finer bossing across the traced region; without local relief the ICP
    # cost is nearly flat tangentially and the refinement can slide.
    ((0.25, 0.60, 0.75), 9.0, 10.0),
    ((-0.15, 0.55, 0.82), 9.0, 10.0),
    ((0.05, 0.35, 0.93), 8.0, 9.0),
    ((-0.30, 0.40, 0.86), 8.0, 11.0),
    ((0.12, 0.70, 0.70), 8.0, 9.0),
)


def _base_surface_point(direction: np.ndarray) -> np.ndarray:
    u = direction / np.linalg.norm(direction)
    scale = float(np.sum(np.abs(u / SEMI_AXES) ** EXPONENT)) ** (-1.0 / EXPONENT)
    return scale * u


_FEATURE_CENTERS = None
_FEATURE_AMPS = None
_FEATURE_WIDTHS = None


def _features() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    global _FEATURE_CENTERS, _FEATURE_AMPS, _FEATURE_WIDTHS
    if _FEATURE_CENTERS is None:
        _FEATURE_CENTERS = np.array([_base_surface_point(np.asarray(d, dtype=np.float64))
                                     for d, _, _ in _FEATURES])
        _FEATURE_AMPS = np.array([a for _, a, _ in _FEATURES])
        _FEATURE_WIDTHS = np.array([w for _, _, w in _FEATURES])
    return _FEATURE_CENTERS, _FEATURE_AMPS, _FEATURE_WIDTHS

_STREAMS = ("surface", "pose", "landmarks", "trace", "liftoffs", "insertion")


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    trace_noise_sigma: float = 0.3
    landmark_noise_sigma: float = 0.5
    liftoff_count: int = 3
    liftoff_height: float = 25.0
    insertion_entry_sigma: float = 0.0
    insertion_angle_sigma: float = 0.0
    insertion_depth_sigma: float = 0.0

    def __post_init__(self):
        if min(self.trace_noise_sigma, self.landmark_noise_sigma,
               self.insertion_entry_sigma, self.insertion_angle_sigma,
               self.insertion_depth_sigma) < 0:
            raise ValueError("noise magnitudes must be non-negative")
        if self.liftoff_count and self.liftoff_height <= 10.0:
            raise ValueError("liftoff_height must exceed the 10 mm outlier gate")

    def rng(self, stream: str) -> np.random.Generator:
        """Independent, reproducible generator for one named purpose."""
        if stream not in _STREAMS:
            raise ValueError(f"unknown stream: {stream!r}")
        root = np.random.SeedSequence(self.seed, spawn_key=(_STREAMS.index(stream),))
        return np.random.Generator(np.random.PCG64(root))


@dataclass(frozen=True)
class Phantom:
    surface: PointCloud
    landmarks: LandmarkSet
    plans: tuple[TrajectoryPlan, ...]
    true_pose: RigidTransform


def implicit_value(points) -> np.ndarray:
    """Head implicit function: negative inside, zero on the surface.

    Superellipsoid base minus Gaussian feature bumps; amplitudes are scaled
    so each bump raises the surface by roughly its nominal height in mm.
    """
    p = np.atleast_2d(np.asarray(points, dtype=np.float64))
    value = np.sum(np.abs(p / SEMI_AXES) ** EXPONENT, axis=1) - 1.0
    centers, amps, widths = _features()
    for c, a, w in zip(centers, amps, widths):
        d2 = np.sum((p - c) ** 2, axis=1)
        value -= (a * EXPONENT / np.linalg.norm(c)) * np.exp(-d2 / (2.0 * w * w))
    return value


def implicit_gradient(points) -> np.ndarray:
    p = np.atleast_2d(np.asarray(points, dtype=np.float64))
    scaled = p / SEMI_AXES
    grad = EXPONENT * np.sign(scaled) * np.abs(scaled) ** (EXPONENT - 1.0) / SEMI_AXES
    centers, amps, widths = _features()
    for c, a, w in zip(centers, amps, widths):
        diff = p - c
        d2 = np.sum(diff ** 2, axis=1)
        coef = (a * EXPONENT / np.linalg.norm(c)) * np.exp(-d2 / (2.0 * w * w)) / (w * w)
        grad += coef[:, None] * diff
    return grad


def surface_points(directions) -> np.ndarray:
    """Radial projection of directions onto the surface (model frame).

    Bisection along each ray; the feature bumps keep F monotone enough on
    [0.6, 1.6] x the base radius that the bracket always holds.
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    base = np.sum(np.abs(dirs / SEMI_AXES) ** EXPONENT, axis=1) ** (-1.0 / EXPONENT)
    lo = 0.6 * base
    hi = 1.6 * base
    for _ in range(52):
        mid = 0.5 * (lo + hi)
        inside = implicit_value(dirs * mid[:, None]) < 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    t = 0.5 * (lo + hi)
    return dirs * t[:, None]


def surface_point(direction) -> np.ndarray:
    return surface_points(np.asarray(direction, dtype=np.float64).reshape(1, 3))[0]


def _surface_normals(points: np.ndarray) -> np.ndarray:
    grads = implicit_gradient(points)
    return grads / np.linalg.norm(grads, axis=1, keepdims=True)


def _model_landmarks() -> LandmarkSet:
    # Approximate anatomical directions; projected exactly onto the surface.
    directions = {
        "right_intertragal_notch": (1.0, -0.05, -0.15),
        "left_intertragal_notch": (-1.0, -0.05, -0.15),
        "right_lateral_canthus": (0.55, 0.8, 0.1),
        "left_lateral_canthus": (-0.55, 0.8, 0.1),
        "right_medial_canthus": (0.2, 0.95, 0.12),
        "left_medial_canthus": (-0.2, 0.95, 0.12),
    }
    labels = CANONICAL_LANDMARKS
    positions = np.array([surface_point(directions[lab]) for lab in labels])
    return LandmarkSet(labels, positions)


def _model_plans() -> tuple[TrajectoryPlan, ...]:
    plans = []
    # 6 per side: entries on the upper forehead, targets near the midline
    # ventricles, slightly staggered so the trajectories are distinct.
    for side in (1.0, -1.0):
        for k in range(6):
            entry_dir = np.array([side * (0.25 + 0.04 * k), 0.55 + 0.05 * k, 0.85])
            skin_entry = surface_point(entry_dir)
            target = np.array([side * 12.0, 10.0 - 3.0 * k, 8.0])
            direction = normalize(target - skin_entry)
            bone_entry = skin_entry + 8.0 * direction
            plans.append(TrajectoryPlan(skin_entry, bone_entry, target))
    return tuple(plans)


def generate_phantom(cfg: SimConfig) -> Phantom:
    """Head-like surface cloud with analytic normals, landmarks, and plans."""
    rng = cfg.rng("surface")
    dirs = rng.normal(size=(SURFACE_POINTS, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    points = surface_points(dirs)
    surface = PointCloud(points, _surface_normals(points))

    pose_rng = cfg.rng("pose")
    axis = normalize(pose_rng.normal(size=3))
    angle = pose_rng.uniform(5.0, 25.0)
    translation = pose_rng.uniform(-150.0, 150.0, size=3)
    true_pose = RigidTransform.from_axis_angle(axis, angle, translation)

    return Phantom(surface, _model_landmarks(), _model_plans(), true_pose)


def digitized_landmarks(phantom: Phantom, cfg: SimConfig) -> LandmarkSet:
    """Simulated stylus digitisation: true landmarks in world frame plus noise."""
    rng = cfg.rng("landmarks")
    world = phantom.true_pose.apply(phantom.landmarks.positions)
    if cfg.landmark_noise_sigma > 0:
        world = world + rng.normal(scale=cfg.landmark_noise_sigma, size=world.shape)
    return LandmarkSet(phantom.landmarks.labels, world)


def _forehead_path(n_rows: int = 24, n_cols: int = 60) -> np.ndarray:
    """Serpentine sweep over the front of the head (model frame).

    The sweep runs from the crown down over the forehead and temples; the
    wide angular baseline is what pins rotation during refinement.
    """
    thetas = np.linspace(0.12, 1.15, n_rows)  # polar angle from +z, radians
    phis = np.linspace(np.pi * 0.1, np.pi * 0.9, n_cols)  # around +y front
    dirs = []
    for r, theta in enumerate(thetas):
        row_phis = phis if r % 2 == 0 else phis[::-1]
        for phi in row_phis:
            dirs.append([np.sin(theta) * np.cos(phi),
                         np.sin(theta) * np.sin(phi),
                         np.cos(theta)])
    return surface_points(np.array(dirs))


def simulate_trace(phantom: Phantom, cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Noisy stylus trace over the forehead patch, in the world frame.

    Returns (timestamps_s, points); lift-off excursions are smooth arcs
    rising along the local normal well past the outlier gate, with approach
    samples below it so the removal rule gets exercised.
    """
    base = _forehead_path()
    rng = cfg.rng("trace")
    noisy = base
    if cfg.trace_noise_sigma > 0:
        noisy = base + rng.normal(scale=cfg.trace_noise_sigma, size=base.shape)
    samples = [row for row in noisy]
    if cfg.liftoff_count:
        lift_rng = cfg.rng("liftoffs")
        slots = np.sort(lift_rng.choice(np.arange(20, len(base) - 20),
                                        size=cfg.liftoff_count, replace=False))[::-1]
        arc_len = 15
        for slot in slots:
            anchor = base[slot]
            normal = _surface_normals(anchor[None])[0]
            heights = cfg.liftoff_height * np.sin(np.pi * np.arange(1, arc_len + 1) / (arc_len + 1))
            arc = anchor[None] + heights[:, None] * normal[None]
            samples[slot:slot] = [row for row in arc]
    pts = np.array(samples)
    world = phantom.true_pose.apply(pts)
    times = 0.02 * np.arange(len(world))  # 50 Hz stylus stream
    return times, world


def _orthonormal_basis(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    seed = np.array([1.0, 0.0, 0.0])
    if abs(direction @ seed) > 0.9:
        seed = np.array([0.0, 1.0, 0.0])
    u = normalize(np.cross(direction, seed))
    v = np.cross(direction, u)
    return u, v


def simulate_insertion(plan: TrajectoryPlan, cfg: SimConfig, n_samples: int = 30,
                       rng: np.random.Generator | None = None) -> tuple[PlacementResult, np.ndarray]:
    """Perturbed catheter placement along a plan, plus its collinear samples.

    The configured magnitudes are applied exactly (lateral shift of
    `insertion_entry_sigma`, tilt of `insertion_angle_sigma` degrees, depth
    offset of `insertion_depth_sigma`); only their directions are drawn from
    the insertion stream. All-zero magnitudes reproduce the plan exactly.
    """
    if rng is None:
        rng = cfg.rng("insertion")
    d = plan.direction
    u, v = _orthonormal_basis(d)

    phi = rng.uniform(0.0, 2 * np.pi)
    lateral = cfg.insertion_entry_sigma * (np.cos(phi) * u + np.sin(phi) * v)
    entry = plan.bone_entry + lateral

    psi = rng.uniform(0.0, 2 * np.pi)
    tilt_axis = np.cos(psi) * u + np.sin(psi) * v
    tilt = RigidTransform.from_axis_angle(tilt_axis, cfg.insertion_angle_sigma)
    actual_dir = normalize(tilt.rotate(d))

    planned_depth = float(np.linalg.norm(plan.target - plan.bone_entry))
    depth = planned_depth + cfg.insertion_depth_sigma
    tip = entry + depth * actual_dir
    skin = entry - float(np.linalg.norm(plan.bone_entry - plan.skin_entry)) * actual_dir

    line = Line3(origin=(skin + tip) / 2.0, direction=actual_dir)
    result = PlacementResult(fitted_line=line, tip=tip,
                             skin_intersection=skin, bone_intersection=entry)
    samples = skin[None] + np.linspace(0.0, 1.0, n_samples)[:, None] * (tip - skin)[None]
    return result, samples
