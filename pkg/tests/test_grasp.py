import json

import numpy as np
import pytest
from types import SimpleNamespace

from handover_sim.cloud import PointCloud, complete_cloud
from handover_sim.geometry import (RigidTransform, Shape, quat_from_yaw,
                                   sample_shape_surface, shape_surface_distance,
                                   surface_distance)
from handover_sim.grasp import (GraspError, GripperModel, HandPose,
                                angle_measure, hand_fit_score, distance_measure,
                                grasp_plan_to_dict, plan_grasp,
                                plan_grasp_detailed, predict_hands,
                                sample_grasps, save_grasp_debug)
from handover_sim.render import default_camera, render
from handover_sim.scene import Scene, TableSlab


def cloud_of(shape, pose, n=2500, seed=0):
    rng = np.random.default_rng(seed)
    pts, normals, idx = sample_shape_surface(shape, pose, n, rng)
    return PointCloud(pts, "completed", normals=normals, prim_index=idx)


@pytest.fixture(scope="module")
def gripper():
    return GripperModel()


class TestSampling:
    def test_upright_cylinder_side_grasps(self, gripper):
        pose = RigidTransform(np.array([0.0, 0.0, 0.26]))
        cloud = cloud_of(Shape.cylinder(0.03, 0.12), pose, seed=1)
        grasps = sample_grasps(cloud, gripper, 24, seed=2, table_top=0.0)
        assert len(grasps) >= 10
        axis = np.array([0.0, 0.0, 1.0])
        for g in grasps:
            jaw = g.pose.rotation()[:, 0]
            assert abs(jaw @ axis) < 0.15, "jaw should be perpendicular to the axis"
            assert g.width == pytest.approx(0.06, abs=0.003)
            assert g.stability >= 0.8
            for contact in (g.contact_a, g.contact_b):
                d = np.linalg.norm(cloud.points - contact, axis=1).min()
                assert d < 0.003

    def test_wide_sphere_infeasible(self, gripper):
        pose = RigidTransform(np.array([0.0, 0.0, 0.3]))
        cloud = cloud_of(Shape.sphere(0.06), pose, seed=3)
        with pytest.raises(GraspError, match="no feasible grasp"):
            sample_grasps(cloud, gripper, 10, seed=4)

    def test_graspable_sphere_near_diametral(self, gripper):
        pose = RigidTransform(np.array([0.0, 0.0, 0.3]))
        cloud = cloud_of(Shape.sphere(0.03), pose, seed=5)
        grasps = sample_grasps(cloud, gripper, 10, seed=6)
        for g in grasps:
            assert g.width == pytest.approx(0.06, abs=0.004)

    def test_degenerate_rank_rejected(self, gripper):
        line = np.linspace(0, 1, 50)[:, None] * np.array([[1.0, 0.0, 0.0]])
        with pytest.raises(GraspError, match="degenerate"):
            sample_grasps(PointCloud(line), gripper, 5, seed=0)

    def test_small_cloud_rejected(self, gripper):
        with pytest.raises(GraspError, match="20 points"):
            sample_grasps(PointCloud(np.random.default_rng(0).normal(size=(10, 3))),
                          gripper, 5, seed=0)

    def test_deterministic_per_seed(self, gripper):
        pose = RigidTransform(np.array([0.0, 0.0, 0.26]))
        cloud = cloud_of(Shape.cylinder(0.03, 0.12), pose, seed=1)
        a = sample_grasps(cloud, gripper, 12, seed=9, table_top=0.0)
        b = sample_grasps(cloud, gripper, 12, seed=9, table_top=0.0)
        assert len(a) == len(b)
        for ga, gb in zip(a, b):
            np.testing.assert_array_equal(ga.pose.position, gb.pose.position)
            assert ga.width == gb.width

    def test_table_clearance_respected(self, gripper):
        pose = RigidTransform(np.array([0.0, 0.0, 0.0125]))
        cloud = cloud_of(Shape.box(0.125, 0.04, 0.025), pose, seed=7)
        grasps = sample_grasps(cloud, gripper, 16, seed=8, table_top=0.0)
        for g in grasps:
            assert g.contact_a[2] >= 0.003 - 1e-12
            assert g.contact_b[2] >= 0.003 - 1e-12
            palm_z = g.pose.position[2] - g.approach[2] * gripper.finger_depth
            assert palm_z >= 0.008 - 1e-12

    def test_pca_normal_fallback(self, gripper):
        # cloud without normals still yields valid side grasps
        pose = RigidTransform(np.array([0.0, 0.0, 0.26]))
        tagged = cloud_of(Shape.cylinder(0.03, 0.12), pose, seed=1)
        bare = PointCloud(tagged.points)
        grasps = sample_grasps(bare, gripper, 8, seed=2, table_top=0.0)
        for g in grasps:
            assert g.width == pytest.approx(0.06, abs=0.006)


class TestMeasures:
    def test_distance_singletons(self):
        assert distance_measure([[0, 0, 0]], [[1, 0, 0]]) == pytest.approx(
            1.0, abs=1e-12)

    def test_distance_identical_singletons_zero(self):
        assert distance_measure([[0.2, -0.1, 3]], [[0.2, -0.1, 3]]) == 0.0

    def test_distance_hand_computed_pairwise(self):
        got = distance_measure([[0, 0, 0]], [[1, 0, 0], [0, 2, 0]])
        assert got == pytest.approx(2.5, abs=1e-12)

    def test_distance_plain_variant(self):
        got = distance_measure([[0, 0, 0]], [[1, 0, 0], [0, 2, 0]],
                               squared=False)
        assert got == pytest.approx(1.5, abs=1e-12)

    def test_distance_empty_rejected(self):
        with pytest.raises(GraspError):
            distance_measure(np.zeros((0, 3)), [[1, 0, 0]])

    def test_angle_fixtures(self):
        assert angle_measure([0, 0, 1], [0, 0, 1]) == pytest.approx(-1.0, abs=1e-12)
        assert angle_measure([0, 0, 1], [0, 0, -1]) == pytest.approx(1.0, abs=1e-12)
        assert angle_measure([1, 0, 0], [0, 1, 0]) == pytest.approx(0.0, abs=1e-12)

    def test_angle_non_unit_rejected(self):
        with pytest.raises(GraspError):
            angle_measure([2, 0, 0], [0, 0, 1])

    def test_angle_always_in_unit_interval(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            a = rng.normal(size=3)
            b = rng.normal(size=3)
            s = angle_measure(a / np.linalg.norm(a), b / np.linalg.norm(b))
            assert -1.0 <= s <= 1.0


def make_hand(center, approach):
    rng = np.random.default_rng(0)
    cloud = center + 0.01 * rng.normal(size=(48, 3))
    return HandPose(cloud=cloud, approach=np.asarray(approach, dtype=float),
                    anchored_part=None)


class TestHandFitScore:
    def test_coincident_grasp_scores_worst(self, gripper):
        pose = RigidTransform(np.array([0.0, 0.0, 0.26]))
        cloud = cloud_of(Shape.cylinder(0.03, 0.12), pose, seed=1)
        grasps = sample_grasps(cloud, gripper, 20, seed=2, table_top=0.0)
        hand_at = grasps[0]
        hand = HandPose(cloud=gripper.contact_cloud(hand_at.pose, hand_at.width),
                        approach=hand_at.approach)
        scored = hand_fit_score(grasps, [hand], gripper, scale=0.02)
        by_grasp = {id(g): s for g, s in scored}
        worst = min(by_grasp.values())
        assert by_grasp[id(grasps[0])] == pytest.approx(worst, abs=1e-9)

    def test_farther_grasp_scores_higher(self, gripper):
        g_near = make_grasp([0.0, 0.0, 0.2], gripper)
        g_far = make_grasp([0.0, 0.3, 0.2], gripper)
        hand = make_hand(np.array([0.0, -0.05, 0.2]), [0.0, 1.0, 0.0])
        scored = hand_fit_score([g_near, g_far], [hand], gripper, scale=0.05)
        assert scored[1][1] > scored[0][1]

    def test_min_over_hands_governs(self, gripper):
        g = make_grasp([0.0, 0.0, 0.2], gripper)
        near_hand = make_hand(np.array([0.0, 0.02, 0.2]), [0.0, -1.0, 0.0])
        far_hand = make_hand(np.array([0.0, 0.5, 0.2]), [0.0, -1.0, 0.0])
        both = hand_fit_score([g], [near_hand, far_hand], gripper, scale=0.05)
        only_near = hand_fit_score([g], [near_hand], gripper, scale=0.05)
        assert both[0][1] == pytest.approx(only_near[0][1], abs=1e-12)

    def test_affine_rescale_preserves_argmax(self, gripper):
        pose = RigidTransform(np.array([0.0, 0.0, 0.26]))
        cloud = cloud_of(Shape.cylinder(0.03, 0.12), pose, seed=1)
        grasps = sample_grasps(cloud, gripper, 15, seed=2, table_top=0.0)
        hands = [make_hand(np.array([0.05, 0.0, 0.3]), [0.0, -1.0, 0.0])]
        scored = hand_fit_score(grasps, hands, gripper, scale=0.03)
        scores = np.array([s for _, s in scored])
        rescaled = 3.7 * scores + 11.0
        assert np.argmax(scores) == np.argmax(rescaled)

    def test_rigid_transform_invariance(self, gripper):
        pose = RigidTransform(np.array([0.0, 0.0, 0.26]))
        cloud = cloud_of(Shape.cylinder(0.03, 0.12), pose, seed=1)
        grasps = sample_grasps(cloud, gripper, 10, seed=2, table_top=0.0)
        hands = [make_hand(np.array([0.06, 0.02, 0.3]), [0.0, -1.0, 0.0])]
        base = hand_fit_score(grasps, hands, gripper, scale=0.04)

        move = RigidTransform(np.array([0.3, -0.2, 0.15]),
                              quat_from_yaw(1.1))
        moved_grasps = [
            type(g)(pose=move @ g.pose, width=g.width,
                    approach=move.apply_vector(g.approach),
                    stability=g.stability,
                    contact_a=move.apply(g.contact_a),
                    contact_b=move.apply(g.contact_b))
            for g in grasps]
        moved_hands = [HandPose(cloud=move.apply(h.cloud),
                                approach=move.apply_vector(h.approach))
                       for h in hands]
        moved = hand_fit_score(moved_grasps, moved_hands, gripper, scale=0.04)
        for (_, a), (_, b) in zip(base, moved):
            assert a == pytest.approx(b, abs=1e-9)

    def test_empty_inputs_rejected(self, gripper):
        with pytest.raises(GraspError):
            hand_fit_score([], [make_hand(np.zeros(3), [0, 0, 1])], gripper)


def make_grasp(mid, gripper, jaw=(1.0, 0.0, 0.0), approach=(0.0, 0.0, -1.0)):
    from handover_sim.grasp import GraspCandidate
    from handover_sim.geometry import quat_from_matrix
    jaw = np.asarray(jaw, dtype=float)
    approach = np.asarray(approach, dtype=float)
    rot = np.column_stack([jaw, np.cross(approach, jaw), approach])
    mid = np.asarray(mid, dtype=float)
    return GraspCandidate(
        pose=RigidTransform(mid, quat_from_matrix(rot)), width=0.05,
        approach=approach, stability=0.9,
        contact_a=mid - 0.025 * jaw, contact_b=mid + 0.025 * jaw)


class TestHands:
    def test_mug_hand_anchored_at_handle(self, catalog):
        obj = catalog["mug"].instantiate(
            "m", RigidTransform(np.array([0.0, 0.0, 0.0]), quat_from_yaw(0.0)))
        completed = complete_cloud(PointCloud(np.zeros((1, 3))), obj, 3000,
                                   seed=0)
        hands = predict_hands(completed, obj, 6, seed=1)
        handle = obj.part_by_name("handle")
        for hand in hands:
            assert hand.anchored_part == "handle"
            # the closest hand points sit on or near the handle region
            dists = np.linalg.norm(
                hand.cloud[:, None, :]
                - completed.points[completed.prim_index == 1][None], axis=2)
            assert dists.min() < 0.01
            assert hand.approach @ np.array([0.0, 1.0, 0.0]) < -0.5
            assert abs(hand.approach[2]) < 0.6

    def test_partless_object_falls_back_to_centroid(self, catalog):
        obj = catalog["pear"].instantiate("p", RigidTransform(np.zeros(3)))
        completed = complete_cloud(PointCloud(np.zeros((1, 3))), obj, 2000,
                                   seed=0)
        hands = predict_hands(completed, obj, 4, seed=1)
        center = obj.pose.apply(np.array([0.0, 0.0, 0.033]))
        for hand in hands:
            assert hand.anchored_part is None
            assert np.linalg.norm(hand.cloud.mean(axis=0) - center) < 0.12

    def test_same_seed_identical(self, catalog):
        obj = catalog["mug"].instantiate("m", RigidTransform(np.zeros(3)))
        completed = complete_cloud(PointCloud(np.zeros((1, 3))), obj, 2000,
                                   seed=0)
        a = predict_hands(completed, obj, 5, seed=7)
        b = predict_hands(completed, obj, 5, seed=7)
        for ha, hb in zip(a, b):
            np.testing.assert_array_equal(ha.cloud, hb.cloud)

    def test_count_precondition(self, catalog):
        obj = catalog["mug"].instantiate("m", RigidTransform(np.zeros(3)))
        completed = complete_cloud(PointCloud(np.zeros((1, 3))), obj, 500, seed=0)
        with pytest.raises(GraspError):
            predict_hands(completed, obj, 0, seed=0)


class TestPlanning:
    def _plan(self, scene, obj_id, part, holder, camera, gripper, seed=5):
        out = render(scene, camera)
        sel = SimpleNamespace(object_id=obj_id, box=out.boxes[obj_id],
                              part_name=part)
        return plan_grasp_detailed(out, sel, holder, scene, camera, gripper,
                                   seed=seed), out

    def test_mug_human_handle_contacts_off_handle(self, mug_scene, camera,
                                                  gripper):
        plan, _ = self._plan(mug_scene, "mug-0", "handle", "human", camera,
                             gripper)
        mug = mug_scene.object_by_id("mug-0")
        handle = mug.part_by_name("handle")
        for g in plan.candidates:
            contacts = np.vstack([g.contact_a, g.contact_b])
            assert not mug.part_membership(handle, contacts).any()
        assert plan.region == "complement"

    def test_screwdriver_robot_shaft_contacts_on_shaft(self, catalog, camera,
                                                       gripper):
        sd = catalog["screwdriver"].instantiate(
            "sd-0", RigidTransform(np.array([0.04, -0.08, 0.0]),
                                   quat_from_yaw(-0.7)))
        scene = Scene(id="sd", seed=0, table=TableSlab(), objects=(sd,))
        plan, _ = self._plan(scene, "sd-0", "shaft", "robot", camera, gripper)
        # independent region oracle: every contact lies on the shaft
        # primitive's surface (analytic distance), not merely cloud-near
        shaft_prim = sd.shape.parts[1]
        world_tf = sd.pose @ shaft_prim.offset
        for g in plan.candidates:
            contacts = np.vstack([g.contact_a, g.contact_b])
            local = world_tf.inverse().apply(contacts)
            assert surface_distance(shaft_prim.prim, local).max() < 0.003

    def test_flashlight_no_preference_leaves_grip_free(self, catalog, camera,
                                                       gripper):
        fl = catalog["flashlight"].instantiate(
            "fl-0", RigidTransform(np.array([0.0, 0.08, 0.0]),
                                   quat_from_yaw(0.2)))
        scene = Scene(id="fl", seed=0, table=TableSlab(), objects=(fl,))
        plan, _ = self._plan(scene, "fl-0", None, "none", camera, gripper)
        grip = fl.part_by_name("grip")
        contacts = np.vstack([plan.best.contact_a, plan.best.contact_b])
        assert not fl.part_membership(grip, contacts).any()
        # the free region of this object is its head end
        head = fl.part_by_name("head")
        assert fl.part_membership(head, contacts).all()

    def test_returned_grasps_meet_stability_floor(self, mug_scene, camera,
                                                  gripper):
        plan, _ = self._plan(mug_scene, "mug-0", None, "none", camera, gripper)
        assert plan.best.stability >= 0.8
        for g in plan.candidates:
            assert g.stability >= 0.8
            assert g.width <= gripper.max_width

    def test_missing_part_errors(self, mug_scene, camera, gripper):
        out = render(mug_scene, camera)
        sel = SimpleNamespace(object_id="pear-0", box=out.boxes["pear-0"],
                              part_name="handle")
        with pytest.raises(GraspError, match="not found"):
            plan_grasp_detailed(out, sel, "robot", mug_scene, camera, gripper,
                                seed=1)

    def test_holder_without_part_errors(self, mug_scene, camera, gripper):
        out = render(mug_scene, camera)
        sel = SimpleNamespace(object_id="mug-0", box=out.boxes["mug-0"],
                              part_name=None)
        with pytest.raises(GraspError, match="named part"):
            plan_grasp_detailed(out, sel, "human", mug_scene, camera, gripper,
                                seed=1)

    def test_plan_grasp_returns_best(self, mug_scene, camera, gripper):
        out = render(mug_scene, camera)
        sel = SimpleNamespace(object_id="mug-0", box=out.boxes["mug-0"],
                              part_name="handle")
        best = plan_grasp(out, sel, "human", mug_scene, camera, gripper, seed=5)
        detailed = plan_grasp_detailed(out, sel, "human", mug_scene, camera,
                                       gripper, seed=5)
        np.testing.assert_array_equal(best.pose.position,
                                      detailed.best.pose.position)

    def test_debug_dump_schema(self, tmp_path, mug_scene, camera, gripper):
        plan, _ = self._plan(mug_scene, "mug-0", None, "none", camera, gripper)
        path = tmp_path / "plan.json"
        save_grasp_debug(plan, path)
        data = json.loads(path.read_text())
        assert set(data) >= {"object_id", "region", "best", "candidates",
                             "hands"}
        assert len(data["candidates"]) == len(plan.candidates)
        assert data["best"]["stability"] >= 0.8
        assert grasp_plan_to_dict(plan) == data
