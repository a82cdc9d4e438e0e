import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from surgnav import Line3, NeighborIndex, PointCloud, RigidTransform, fit_line, voxel_downsample
from surgnav.errors import DegenerateInputError
from surgnav.geometry import angle_between_deg, as_points, normalize

from conftest import random_rigid, random_rotation


class TestValidation:
    def test_as_points_shapes(self):
        assert as_points([1.0, 2.0, 3.0]).shape == (1, 3)
        assert as_points([[1, 2, 3], [4, 5, 6]]).shape == (2, 3)
        with pytest.raises(ValueError):
            as_points([[1.0, 2.0]])
        with pytest.raises(ValueError):
            as_points([[1.0, 2.0, np.nan]])

    def test_normalize_rejects_zero(self):
        with pytest.raises(DegenerateInputError):
            normalize([0.0, 0.0, 0.0])

    def test_angle_between_deg(self):
        assert angle_between_deg([1, 0, 0], [0, 1, 0]) == pytest.approx(90.0)
        assert angle_between_deg([1, 0, 0], [-1, 0, 0]) == pytest.approx(180.0)
        assert angle_between_deg([2, 0, 0], [5, 0, 0]) == pytest.approx(0.0)


class TestRigidTransform:
    def test_rejects_improper_rotation(self):
        with pytest.raises(ValueError):
            RigidTransform(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
        with pytest.raises(ValueError):
            RigidTransform(np.eye(3) * 1.001, np.zeros(3))

    def test_apply_matches_matrix_oracle(self, rng):
        T = random_rigid(rng)
        pts = rng.normal(scale=40.0, size=(50, 3))
        expected = (T.rotation @ pts.T).T + T.translation
        np.testing.assert_allclose(T.apply(pts), expected, atol=1e-12)

    def test_compose_applies_other_first(self, rng):
        A = random_rigid(rng)
        B = random_rigid(rng)
        p = rng.normal(size=3)
        np.testing.assert_allclose(A.compose(B).apply(p), A.apply(B.apply(p)), atol=1e-9)

    def test_inverse_both_orders(self, rng):
        T = random_rigid(rng)
        for C in (T.compose(T.inverse()), T.inverse().compose(T)):
            assert np.abs(C.rotation - np.eye(3)).max() < 1e-9
            assert np.abs(C.translation).max() < 1e-9

    def test_from_axis_angle_quarter_turn(self):
        T = RigidTransform.from_axis_angle([0, 0, 1], 90.0)
        np.testing.assert_allclose(T.rotate([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-12)
        assert T.rotation_angle_deg() == pytest.approx(90.0)

    @settings(deadline=None, max_examples=50)
    @given(seed=st.integers(0, 10_000))
    def test_rigidity_preserves_pairwise_distances(self, seed):
        r = np.random.default_rng(seed)
        T = random_rigid(r)
        pts = r.normal(scale=100.0, size=(20, 3))
        moved = T.apply(pts)
        d0 = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
        d1 = np.linalg.norm(moved[:, None] - moved[None, :], axis=2)
        assert np.abs(d0 - d1).max() < 1e-9


class TestPointCloud:
    def test_normals_must_be_unit(self):
        with pytest.raises(ValueError):
            PointCloud(np.zeros((2, 3)), np.full((2, 3), 1.0))

    def test_transformed_rotates_normals(self, rng):
        T = random_rigid(rng)
        cloud = PointCloud([[1, 2, 3]], [[0.0, 0.0, 1.0]])
        out = cloud.transformed(T)
        np.testing.assert_allclose(out.points[0], T.apply([1.0, 2.0, 3.0]), atol=1e-12)
        np.testing.assert_allclose(out.normals[0], T.rotation @ [0.0, 0.0, 1.0], atol=1e-12)


class TestNeighborIndex:
    def test_nearest_matches_exhaustive_scan(self, rng):
        pts = rng.uniform(-50, 50, size=(500, 3))
        index = NeighborIndex(PointCloud(pts))
        for q in rng.uniform(-60, 60, size=(200, 3)):
            dists = np.linalg.norm(pts - q, axis=1)
            i, d = index.nearest(q)
            assert d == pytest.approx(dists.min(), abs=1e-12)
            assert dists[i] == pytest.approx(dists.min(), abs=1e-12)

    def test_nearest_many_matches_scalar_path(self, rng):
        pts = rng.uniform(-50, 50, size=(300, 3))
        index = NeighborIndex(PointCloud(pts))
        queries = rng.uniform(-60, 60, size=(100, 3))
        idx, dists = index.nearest_many(queries)
        for q, i, d in zip(queries, idx, dists):
            i2, d2 = index.nearest(q)
            assert i == i2
            assert d == pytest.approx(d2, abs=1e-12)

    def test_tie_breaks_to_lowest_index(self):
        # Both points are exactly 1 mm from the origin query.
        index = NeighborIndex(PointCloud([[3.0, 0.0, 1.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]))
        i, d = index.nearest([0.0, 0.0, 0.0])
        assert (i, d) == (1, 1.0)
        idx, _ = index.nearest_many(np.array([[0.0, 0.0, 0.0]]))
        assert idx[0] == 1

    def test_empty_cloud_rejected(self):
        with pytest.raises(DegenerateInputError):
            NeighborIndex(PointCloud(np.empty((0, 3))))


def _voxel_oracle(points: np.ndarray, voxel: float) -> np.ndarray:
    """Independent hash-grid downsampling: dict of cell -> running mean."""
    cells: dict[tuple, list] = {}
    for p in points:
        key = tuple(int(np.floor(c / voxel)) for c in p)
        cells.setdefault(key, []).append(p)
    return np.array(sorted((np.mean(v, axis=0).tolist() for v in cells.values())))


class TestVoxelDownsample:
    def test_matches_hash_grid_oracle(self, rng):
        pts = rng.uniform(-20, 20, size=(800, 3))
        out = voxel_downsample(PointCloud(pts), 2.5).points
        expected = _voxel_oracle(pts, 2.5)
        np.testing.assert_allclose(np.array(sorted(out.tolist())), expected, atol=1e-9)

    def test_output_within_half_diagonal(self, rng):
        voxel = 3.0
        pts = rng.uniform(-20, 20, size=(500, 3))
        out = voxel_downsample(PointCloud(pts), voxel).points
        assert len(out) <= len(pts)
        for c in out:
            assert np.linalg.norm(pts - c, axis=1).min() <= voxel * np.sqrt(3) / 2 + 1e-9

    def test_normals_averaged_and_renormalized(self):
        normals = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        cloud = PointCloud([[0.1, 0.1, 0.1], [0.2, 0.2, 0.2]], normals)
        out = voxel_downsample(cloud, 1.0)
        assert len(out) == 1
        np.testing.assert_allclose(out.normals[0], [np.sqrt(0.5), np.sqrt(0.5), 0.0], atol=1e-12)

    def test_rejects_bad_voxel(self):
        with pytest.raises(ValueError):
            voxel_downsample(PointCloud([[0.0, 0.0, 0.0]]), 0.0)


class TestFitLine:
    def test_recovers_known_line(self, rng):
        direction = normalize([1.0, 2.0, -0.5])
        s = np.linspace(-30, 30, 40)
        pts = np.array([10.0, -5.0, 2.0]) + s[:, None] * direction
        line = fit_line(PointCloud(pts))
        np.testing.assert_allclose(line.direction, direction, atol=1e-9)
        np.testing.assert_allclose(line.origin, pts.mean(axis=0), atol=1e-9)

    def test_sign_points_first_to_last(self):
        pts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        assert fit_line(PointCloud(pts)).direction[0] > 0
        assert fit_line(PointCloud(pts[::-1])).direction[0] < 0

    @settings(deadline=None, max_examples=30)
    @given(seed=st.integers(0, 10_000))
    def test_direction_equivariant_under_rigid_transform(self, seed):
        r = np.random.default_rng(seed)
        s = np.linspace(0, 50, 25)
        pts = s[:, None] * normalize(r.normal(size=3)) + r.normal(scale=0.1, size=(25, 3))
        T = random_rigid(r)
        d0 = fit_line(PointCloud(pts)).direction
        d1 = fit_line(PointCloud(T.apply(pts))).direction
        np.testing.assert_allclose(d1, T.rotation @ d0, atol=1e-9)

    def test_degenerate_inputs(self):
        with pytest.raises(DegenerateInputError):
            fit_line(PointCloud([[1.0, 1.0, 1.0]]))
        with pytest.raises(DegenerateInputError):
            fit_line(PointCloud([[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]]))


def test_line3_point_at():
    line = Line3([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    np.testing.assert_allclose(line.point_at(2.5), [1.0, 2.5, 0.0])
