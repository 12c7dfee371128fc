import numpy as np
import pytest

from handover_sim.geometry import RigidTransform, Shape
from handover_sim.render import (CameraModel, default_camera, deproject,
                                 load_depth, project, render, save_depth)
from handover_sim.scene import Scene, SceneError, TableSlab, SceneObject


def sphere_object(obj_id, center, radius):
    return SceneObject(id=obj_id, name="ball", synonyms=(),
                       shape=Shape.sphere(radius),
                       pose=RigidTransform(np.asarray(center, dtype=float)),
                       parts=(), mass_class="large", nominal_width=2 * radius)


def box_object(obj_id, center, size):
    return SceneObject(id=obj_id, name="slab", synonyms=(),
                       shape=Shape.box(*size),
                       pose=RigidTransform(np.asarray(center, dtype=float)),
                       parts=(), mass_class="large", nominal_width=size[0])


def forward_camera(fx=500.0, width=640, height=480):
    """Camera at the origin looking along +z (identity pose)."""
    return CameraModel(fx=fx, fy=fx, cx=(width - 1) / 2, cy=(height - 1) / 2,
                       width=width, height=height, pose=RigidTransform())


def analytic_sphere_depth(camera, pixel, center, radius):
    """Closest quadratic root of the pixel ray against the sphere."""
    d = np.array([(pixel[0] - camera.cx) / camera.fx,
                  (pixel[1] - camera.cy) / camera.fy, 1.0])
    a = d @ d
    b = -2.0 * d @ center
    c = center @ center - radius ** 2
    disc = b * b - 4 * a * c
    if disc < 0:
        return np.inf
    return (-b - np.sqrt(disc)) / (2 * a)


@pytest.fixture(scope="module")
def sphere_output():
    cam = forward_camera(fx=500.0)
    scene = Scene(id="sphere", seed=0, table=TableSlab(5, 5, 0.1),
                  objects=(sphere_object("ball-0", [0, 0, 1.0], 0.5),))
    return cam, render(scene, cam)


class TestSphereFixture:
    """Half-meter-radius sphere centered on the optical axis at 1 m."""

    @pytest.fixture()
    def output(self, sphere_output):
        return sphere_output

    def test_box_centered_at_principal_point(self, output):
        cam, out = output
        u0, v0, u1, v1 = out.boxes["ball-0"]
        assert (u0 + u1) / 2 == pytest.approx(cam.cx, abs=0.5)
        assert (v0 + v1) / 2 == pytest.approx(cam.cy, abs=0.5)

    def test_depth_minimum_matches_quadratic_oracle(self, output):
        cam, out = output
        depth = out.depth.copy()
        depth[depth == 0] = np.inf
        v, u = np.unravel_index(np.argmin(depth), depth.shape)
        expected = analytic_sphere_depth(cam, (u, v), np.array([0, 0, 1.0]), 0.5)
        assert depth[v, u] == pytest.approx(expected, abs=1e-9)
        assert depth[v, u] == pytest.approx(0.5, abs=1e-5)

    def test_all_depths_match_oracle(self, output):
        cam, out = output
        vs, us = np.nonzero(out.labels == 0)
        rng = np.random.default_rng(0)
        for i in rng.choice(len(vs), 200, replace=False):
            expected = analytic_sphere_depth(cam, (us[i], vs[i]),
                                             np.array([0, 0, 1.0]), 0.5)
            assert out.depth[vs[i], us[i]] == pytest.approx(expected, abs=1e-9)


def test_empty_scene_all_background(camera):
    scene = Scene(id="empty", seed=0, table=TableSlab(), objects=())
    out = render(scene, camera)
    assert (out.labels == -1).all()
    assert (out.depth == 0).all()
    assert out.boxes == {}


def test_full_occlusion_drops_box():
    cam = forward_camera()
    hidden = sphere_object("hidden-0", [0, 0, 2.0], 0.2)
    blocker = box_object("blocker-0", [0, 0, 1.0], (1.2, 1.2, 0.1))
    scene = Scene(id="occ", seed=0, table=TableSlab(5, 5, 0.1),
                  objects=(hidden, blocker))
    out = render(scene, cam)
    assert "blocker-0" in out.boxes
    assert "hidden-0" not in out.boxes


def test_partial_occlusion_keeps_front_depths():
    cam = forward_camera()
    back = box_object("back-0", [0.3, 0, 2.0], (1.4, 1.4, 0.1))
    front = sphere_object("front-0", [0, 0, 1.0], 0.3)
    scene = Scene(id="occ2", seed=0, table=TableSlab(5, 5, 0.1),
                  objects=(back, front))
    out = render(scene, cam)
    v, u = np.nonzero(out.labels == 1)
    assert (out.depth[v, u] < 1.01).all()
    assert "back-0" in out.boxes


def test_box_tightness(mug_scene, camera):
    out = render(mug_scene, camera)
    for oid, (u0, v0, u1, v1) in out.boxes.items():
        idx = out.label_index(oid)
        mask = out.labels == idx
        # every edge row/column holds at least one labeled pixel
        assert mask[v0, u0:u1 + 1].any()
        assert mask[v1, u0:u1 + 1].any()
        assert mask[v0:v1 + 1, u0].any()
        assert mask[v0:v1 + 1, u1].any()
        # nothing outside the box is labeled
        outside = mask.copy()
        outside[v0:v1 + 1, u0:u1 + 1] = False
        assert not outside.any()


def test_render_deterministic(mug_scene, camera):
    a = render(mug_scene, camera)
    b = render(mug_scene, camera)
    assert a.labels.tobytes() == b.labels.tobytes()
    assert a.depth.tobytes() == b.depth.tobytes()
    assert a.boxes == b.boxes


def test_part_masks_subset_of_labels(mug_scene, camera):
    out = render(mug_scene, camera)
    for (oid, _part), flat in out.part_masks.items():
        idx = out.label_index(oid)
        assert (out.labels.reshape(-1)[flat] == idx).all()


def test_part_masks_union_covers_clipped_object(catalog, camera):
    from handover_sim.geometry import quat_from_yaw
    obj = catalog["mug"].instantiate(
        "mug-0", RigidTransform(np.array([0.0, 0.0, 0.0]), quat_from_yaw(0.2)))
    scene = Scene(id="m", seed=0, table=TableSlab(), objects=(obj,))
    out = render(scene, camera)
    handle = set(out.part_masks[("mug-0", "handle")].tolist())
    rim = set(out.part_masks[("mug-0", "rim")].tolist())
    body = set(out.part_masks[("mug-0", "body")].tolist())
    assert not (rim & body)
    assert not (handle & rim)
    labeled = set(np.flatnonzero(out.labels == 0).tolist())
    assert (handle | rim | body) == labeled


class TestProjection:
    def test_principal_point(self, camera):
        p = deproject((camera.cx, camera.cy), 1.0, camera)
        local = camera.pose.inverse().apply(p)
        np.testing.assert_allclose(local, [0, 0, 1.0], atol=1e-12)

    def test_hand_pinhole_case(self):
        cam = forward_camera(fx=500.0)
        p = deproject((cam.cx + cam.fx, cam.cy), 1.0, cam)
        np.testing.assert_allclose(p, [1.0, 0.0, 1.0], atol=1e-12)

    def test_roundtrip_1000_random_pixels(self, camera):
        rng = np.random.default_rng(8)
        us = rng.uniform(0, camera.width - 1, 1000)
        vs = rng.uniform(0, camera.height - 1, 1000)
        ds = rng.uniform(0.2, 3.0, 1000)
        for u, v, d in zip(us, vs, ds):
            uv, z = project(deproject((u, v), d, camera), camera)
            assert abs(uv[0, 0] - u) < 1e-6
            assert abs(uv[0, 1] - v) < 1e-6
            assert z[0] == pytest.approx(d, abs=1e-9)

    def test_roundtrip_random_camera_poses(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            q = rng.normal(size=4)
            cam = CameraModel(fx=520.0, fy=610.0, cx=320.0, cy=240.0,
                              width=640, height=480,
                              pose=RigidTransform(rng.normal(size=3),
                                                  q / np.linalg.norm(q)))
            for _ in range(50):
                u, v = rng.uniform(0, 639), rng.uniform(0, 479)
                d = rng.uniform(0.1, 4.0)
                uv, _ = project(deproject((u, v), d, cam), cam)
                assert abs(uv[0, 0] - u) < 1e-6
                assert abs(uv[0, 1] - v) < 1e-6

    def test_nonpositive_depth_rejected(self, camera):
        with pytest.raises(ValueError):
            deproject((10, 10), 0.0, camera)
        with pytest.raises(ValueError):
            deproject((10, 10), -1.0, camera)

    def test_camera_validation(self):
        with pytest.raises(ValueError):
            CameraModel(fx=-1, fy=1, cx=0, cy=0, width=10, height=10)
        with pytest.raises(ValueError):
            CameraModel(fx=1, fy=1, cx=20, cy=0, width=10, height=10)


class TestDepthFile:
    def test_roundtrip_bit_exact(self, tmp_path, mug_render):
        path = tmp_path / "depth.bin"
        save_depth(mug_render.depth, path)
        loaded = load_depth(path)
        assert loaded.dtype == np.float32
        assert loaded.tobytes() == mug_render.depth.astype(np.float32).tobytes()

    def test_header_size(self, tmp_path):
        path = tmp_path / "d.bin"
        save_depth(np.zeros((2, 3), dtype=np.float32), path)
        raw = path.read_bytes()
        assert len(raw) == 16 + 2 * 3 * 4

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOTDEPTH" + b"\x00" * 16)
        with pytest.raises(SceneError, match="magic"):
            load_depth(path)
