import numpy as np
import pytest

from surgnav import PointCloud, RigidTransform


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, 180.0)
    return RigidTransform.from_axis_angle(axis, angle).rotation


def random_rigid(rng: np.random.Generator, translation_scale: float = 50.0) -> RigidTransform:
    return RigidTransform(random_rotation(rng),
                          rng.uniform(-translation_scale, translation_scale, size=3))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def phantom42():
    """Reference phantom, generated once per test session."""
    from surgnav.phantom import SimConfig, generate_phantom
    cfg = SimConfig(seed=42)
    return cfg, generate_phantom(cfg)


def plane_cloud(n: int = 21, spacing: float = 1.0) -> PointCloud:
    """Regular grid on z = 0 with +z normals; a convenient trace-filter model."""
    xs = np.arange(n) * spacing
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(n * n)])
    normals = np.tile([0.0, 0.0, 1.0], (len(pts), 1))
    return PointCloud(pts, normals)
