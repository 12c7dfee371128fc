import numpy as np
import pytest

from handover_sim.cloud import (PointCloud, complete_cloud, extract_point_cloud,
                                part_filter, remove_outliers)
from handover_sim.geometry import (RigidTransform, Shape,
                                   sample_shape_surface, shape_surface_distance)
from handover_sim.render import CameraModel, render
from handover_sim.scene import Scene, TableSlab, SceneObject


def forward_camera(fx=500.0):
    return CameraModel(fx=fx, fy=fx, cx=319.5, cy=239.5, width=640, height=480,
                       pose=RigidTransform())


@pytest.fixture(scope="module")
def sphere_setup():
    cam = forward_camera()
    obj = SceneObject(id="ball-0", name="ball", synonyms=(),
                      shape=Shape.sphere(0.5),
                      pose=RigidTransform(np.array([0.0, 0.0, 1.0])),
                      parts=(), mass_class="large", nominal_width=1.0)
    scene = Scene(id="s", seed=0, table=TableSlab(5, 5, 0.1), objects=(obj,))
    return cam, scene, render(scene, cam)


class TestExtraction:
    def test_sphere_points_on_surface(self, sphere_setup):
        cam, scene, out = sphere_setup
        cloud = extract_point_cloud(np.array(out.boxes["ball-0"]), out, cam,
                                    object_id="ball-0")
        assert cloud.source == "observed"
        dist = np.linalg.norm(cloud.points - [0, 0, 1.0], axis=1)
        np.testing.assert_allclose(dist, 0.5, atol=1e-6)

    def test_background_region_empty(self, sphere_setup):
        cam, scene, out = sphere_setup
        cloud = extract_point_cloud(np.array([0, 0, 10, 10]), out, cam)
        assert len(cloud) == 0

    def test_label_filter_straddling_region(self, mug_scene, camera):
        out = render(mug_scene, camera)
        h, w = out.labels.shape
        whole = np.array([0, 0, w - 1, h - 1])
        target = extract_point_cloud(whole, out, camera, object_id="mug-0")
        mug = mug_scene.object_by_id("mug-0")
        assert len(target) > 100
        assert shape_surface_distance(mug.shape, mug.pose,
                                      target.points).max() < 1e-6

    def test_region_out_of_bounds_rejected(self, sphere_setup):
        cam, scene, out = sphere_setup
        with pytest.raises(ValueError):
            extract_point_cloud(np.array([0, 0, 900, 10]), out, cam)


class TestOutlierRemoval:
    def brute_force_filter(self, points, k, std_ratio):
        """Independent one-pass filter with O(n^2) neighbor search."""
        n = len(points)
        mean_knn = np.empty(n)
        for i in range(n):
            d = np.sort(np.linalg.norm(points - points[i], axis=1))
            mean_knn[i] = d[1:k + 1].mean()
        keep = mean_knn <= mean_knn.mean() + std_ratio * mean_knn.std()
        return points[keep]

    def test_far_point_removed_against_oracle(self):
        rng = np.random.default_rng(0)
        v = rng.normal(size=(100, 3))
        pts = 0.05 * v / np.linalg.norm(v, axis=1, keepdims=True)
        pts = np.vstack([pts, [[1.0, 0.0, 0.0]]])
        cloud = PointCloud(pts)
        cleaned = remove_outliers(cloud, k=8, std_ratio=2.0)
        assert len(cleaned) == 100
        assert not np.isclose(cleaned.points, [1.0, 0.0, 0.0]).all(axis=1).any()
        expected = self.brute_force_filter(pts, 8, 2.0)
        np.testing.assert_array_equal(
            np.sort(cleaned.points, axis=0), np.sort(expected, axis=0))

    def test_infinite_ratio_identity(self):
        rng = np.random.default_rng(1)
        cloud = PointCloud(rng.uniform(size=(50, 3)))
        cleaned = remove_outliers(cloud, k=8, std_ratio=np.inf)
        assert len(cleaned) == 50

    def test_small_cloud_unchanged(self):
        cloud = PointCloud(np.eye(3))
        cleaned = remove_outliers(cloud, k=8)
        assert cleaned is cloud

    def test_k_precondition(self):
        with pytest.raises(ValueError):
            remove_outliers(PointCloud(np.eye(3)), k=0)

    @pytest.mark.parametrize("shape", [Shape.sphere(0.04),
                                       Shape.cylinder(0.03, 0.1),
                                       Shape.box(0.05, 0.03, 0.02)])
    def test_idempotent_on_random_samples_at_wide_ratio(self, shape):
        # iid surface samples have a kNN-spacing tail out to ~3.5 sigma, so
        # strict idempotence needs a ratio above that tail; at the default
        # 2.0 a repeat pass keeps trimming (see decisions notes)
        rng = np.random.default_rng(2)
        pts, _, _ = sample_shape_surface(shape, RigidTransform(np.zeros(3)),
                                         800, rng)
        once = remove_outliers(PointCloud(pts), k=8, std_ratio=4.0)
        twice = remove_outliers(once, k=8, std_ratio=4.0)
        assert len(twice) == len(once)


class TestCompletion:
    def test_half_visible_cylinder_back_covered(self, catalog, camera):
        obj = catalog["chef_can"].instantiate(
            "cc-0", RigidTransform(np.array([0.0, 0.0, 0.0])))
        scene = Scene(id="c", seed=0, table=TableSlab(), objects=(obj,))
        out = render(scene, camera)
        observed = extract_point_cloud(np.array(out.boxes["cc-0"]), out,
                                       camera, object_id="cc-0")
        # overhead camera sees the lid and upper side, never the bottom
        assert observed.points[:, 2].min() > 0.005
        completed = complete_cloud(observed, obj, samples=4000, seed=0)
        assert completed.source == "completed"
        assert completed.points[:, 2].min() < 0.002
        dist = shape_surface_distance(obj.shape, obj.pose, completed.points)
        assert dist.max() < 1e-6

    def test_observed_within_1mm_of_completed_surface(self, mug_scene, camera):
        out = render(mug_scene, camera)
        mug = mug_scene.object_by_id("mug-0")
        observed = extract_point_cloud(np.array(out.boxes["mug-0"]), out,
                                       camera, object_id="mug-0")
        assert shape_surface_distance(mug.shape, mug.pose,
                                      observed.points).max() < 1e-3

    def test_zero_samples_rejected(self, catalog):
        obj = catalog["pear"].instantiate("p", RigidTransform(np.zeros(3)))
        with pytest.raises(ValueError, match="samples"):
            complete_cloud(PointCloud(np.zeros((1, 3))), obj, samples=0)

    def test_sphere_centroid_within_1mm(self, catalog):
        obj = catalog["pear"].instantiate("p", RigidTransform(np.zeros(3)))
        completed = complete_cloud(PointCloud(np.zeros((1, 3))), obj,
                                   samples=4096, seed=3)
        center = obj.pose.apply(np.array([0.0, 0.0, 0.033]))
        assert np.linalg.norm(completed.points.mean(axis=0) - center) < 1e-3

    def test_deterministic_per_seed(self, catalog):
        obj = catalog["mug"].instantiate("m", RigidTransform(np.zeros(3)))
        a = complete_cloud(PointCloud(np.zeros((1, 3))), obj, 512, seed=5)
        b = complete_cloud(PointCloud(np.zeros((1, 3))), obj, 512, seed=5)
        np.testing.assert_array_equal(a.points, b.points)


class TestPartFilter:
    def test_tagged_cloud_exact_split(self, catalog):
        obj = catalog["mug"].instantiate("m", RigidTransform(np.zeros(3)))
        completed = complete_cloud(PointCloud(np.zeros((1, 3))), obj, 3000,
                                   seed=1)
        handle = obj.part_by_name("handle")
        inside = part_filter(completed, obj, handle)
        outside = part_filter(completed, obj, handle, exclude=True)
        assert len(inside) + len(outside) == len(completed)
        assert (inside.prim_index == 1).all()
        assert (outside.prim_index != 1).sum() == len(outside)
