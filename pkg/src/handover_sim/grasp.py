"""Preference-aware parallel-jaw grasp planning.

Candidates come from antipodal sampling over the (completed) object cloud:
pick a surface point, find an opposing contact whose normal counteracts the
jaw closing axis, then fit a collision-free approach around the jaw. When the
command named a part, grasps are sampled inside the permitted region and
ranked by antipodal stability. Without a stated preference, heuristic human
hand placements are predicted at the object's conventional contact region and
each grasp is scored by how far it stays from the worst-case hand and how
opposed its approach direction is.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .cloud import PointCloud, complete_cloud, extract_point_cloud, part_filter, remove_outliers
from .geometry import RigidTransform, normalize, quat_from_matrix, shape_bounding_radius
from .render import CameraModel, RenderOutput
from .scene import Scene, SceneObject


class GraspError(Exception):
    """Raised when no feasible grasp exists or inputs are degenerate."""


def _default_contact_template(max_width: float, finger_depth: float) -> np.ndarray:
    """Closed-finger surface points in the gripper frame at nominal width.

    Frame: x = jaw axis, z = approach direction (travel toward the object),
    origin at the midpoint between fingertips. Only the finger pads near the
    contacts are modeled: hand-distance scoring needs the surfaces that could
    actually crowd a human hand, and bulk points farther up the wrist would
    wash that signal out of the mean pair distance.
    """
    ys = np.array([-0.008, 0.0, 0.008])
    zs = np.linspace(0.0, -0.5 * finger_depth, 3)
    pads = []
    for sx in (-1.0, 1.0):
        for y in ys:
            for z in zs:
                pads.append([sx * max_width / 2, y, z])
    return np.asarray(pads)


@dataclass(frozen=True)
class GripperModel:
    """Parallel-jaw gripper geometry used for sampling and hand-distance scoring."""

    max_width: float = 0.085
    finger_depth: float = 0.04
    contact_cloud_template: np.ndarray | None = None

    def __post_init__(self):
        if self.max_width <= 0:
            raise GraspError("max_width must be positive")
        tpl = self.contact_cloud_template
        if tpl is None:
            tpl = _default_contact_template(self.max_width, self.finger_depth)
        tpl = np.asarray(tpl, dtype=float)
        if len(tpl) == 0:
            raise GraspError("contact cloud template must be non-empty")
        object.__setattr__(self, "contact_cloud_template", tpl)

    def contact_cloud(self, pose: RigidTransform, width: float) -> np.ndarray:
        """Template instantiated at the grasp pose with jaws at `width`."""
        pts = self.contact_cloud_template.copy()
        pts[:, 0] *= width / self.max_width
        return pose.apply(pts)


@dataclass(frozen=True)
class GraspCandidate:
    """One parallel-jaw grasp: pose in SE(3), contacts, and quality scores."""

    pose: RigidTransform
    width: float
    approach: np.ndarray            # unit, world frame, gripper travel direction
    stability: float                # mean |n . jaw| over both contacts
    contact_a: np.ndarray
    contact_b: np.ndarray
    hand_fit_score: float | None = None

    def __post_init__(self):
        a = np.asarray(self.approach, dtype=float)
        if abs(np.linalg.norm(a) - 1.0) > 1e-6:
            raise GraspError("approach must be a unit vector")
        if not 0.0 <= self.stability <= 1.0:
            raise GraspError("stability must lie in [0, 1]")
        object.__setattr__(self, "approach", a)
        object.__setattr__(self, "contact_a",
                           np.asarray(self.contact_a, dtype=float))
        object.__setattr__(self, "contact_b",
                           np.asarray(self.contact_b, dtype=float))


@dataclass(frozen=True)
class HandPose:
    """Predicted human hand placement: proxy point cloud plus approach direction."""

    cloud: np.ndarray
    approach: np.ndarray
    anchored_part: str | None = None

    def __post_init__(self):
        c = np.asarray(self.cloud, dtype=float)
        a = np.asarray(self.approach, dtype=float)
        if len(c) == 0:
            raise GraspError("hand cloud must be non-empty")
        if abs(np.linalg.norm(a) - 1.0) > 1e-6:
            raise GraspError("hand approach must be a unit vector")
        object.__setattr__(self, "cloud", c)
        object.__setattr__(self, "approach", a)


def _estimate_normals(points: np.ndarray, k: int = 12) -> np.ndarray:
    """Local-plane normals oriented away from the cloud centroid."""
    tree = cKDTree(points)
    _, idx = tree.query(points, k=min(k, len(points)))
    centroid = points.mean(axis=0)
    normals = np.empty_like(points)
    for i, nb in enumerate(idx):
        patch = points[nb] - points[nb].mean(axis=0)
        _, _, vt = np.linalg.svd(patch, full_matrices=False)
        n = vt[-1]
        if n @ (points[i] - centroid) < 0:
            n = -n
        normals[i] = n
    return normals


def _perp_basis(axis: np.ndarray):
    ref = np.array([0.0, 0.0, 1.0])
    if abs(axis @ ref) > 0.95:
        ref = np.array([1.0, 0.0, 0.0])
    u = normalize(np.cross(axis, ref))
    v = np.cross(axis, u)
    return u, v


def sample_grasps(cloud: PointCloud, gripper: GripperModel, count: int,
                  seed: int, *, table_top: float | None = None,
                  min_side_alignment: float = 0.7,
                  min_stability: float = 0.8,
                  contact_clearance: float = 0.003,
                  palm_clearance: float = 0.008) -> list:
    """Seeded antipodal sampling; returns up to `count` candidates by stability.

    Contacts lie on the cloud, jaw separation stays within the gripper width,
    and approaches are screened against the table slab. Raises GraspError for
    degenerate clouds or when nothing feasible is found.
    """
    if count < 1:
        raise GraspError("count must be >= 1")
    pts = cloud.points
    if len(pts) < 20:
        raise GraspError("cloud too small to sample grasps (need >= 20 points)")
    spread = np.linalg.svd(pts - pts.mean(axis=0), compute_uv=False)
    if spread[1] < 1e-8:
        raise GraspError("degenerate cloud: points have rank < 2 spread")
    normals = cloud.normals if cloud.normals is not None else _estimate_normals(pts)

    rng = np.random.default_rng(seed)
    budget = max(count * 12, 300)
    order = rng.integers(0, len(pts), budget)
    kept: list = []

    for i in order:
        if len(kept) >= count * 3:
            break
        p1, n1 = pts[i], normals[i]
        if table_top is not None and p1[2] < table_top + contact_clearance:
            continue
        delta = pts - p1
        dist = np.linalg.norm(delta, axis=1)
        feasible = (dist > 0.003) & (dist <= gripper.max_width)
        if table_top is not None:
            feasible &= pts[:, 2] >= table_top + contact_clearance
        if not feasible.any():
            continue
        idx = np.flatnonzero(feasible)
        dhat = delta[idx] / dist[idx, None]
        close_align = dhat @ n1                      # want ~ -1 at contact 1
        far_align = np.einsum("ij,ij->i", normals[idx], dhat)  # want ~ +1
        valid = (close_align <= -min_side_alignment) & (far_align >= min_side_alignment)
        if not valid.any():
            continue
        quality = np.where(valid, (-close_align + far_align) / 2, -np.inf)
        j = int(np.argmax(quality))
        stability = float(quality[j])
        if stability < min_stability:
            continue
        p2 = pts[idx[j]]
        width = float(dist[idx[j]])
        jaw = dhat[j]
        mid = (p1 + p2) / 2

        u, v = _perp_basis(jaw)
        phis = np.linspace(0, 2 * np.pi, 8, endpoint=False) + rng.uniform(0, 2 * np.pi)
        approaches = np.cos(phis)[:, None] * u + np.sin(phis)[:, None] * v
        # favor top-down style approaches, which clear the table most often
        approaches = approaches[np.argsort(approaches[:, 2])]
        chosen = None
        for a in approaches:
            if a[2] > 0.25:
                continue  # approaching from underneath
            if table_top is not None:
                palm_z = mid[2] - a[2] * gripper.finger_depth
                if palm_z < table_top + palm_clearance:
                    continue
            chosen = a
            break
        if chosen is None:
            continue
        z_axis = chosen
        y_axis = np.cross(z_axis, jaw)
        rot = np.column_stack([jaw, y_axis, z_axis])
        pose = RigidTransform(mid, quat_from_matrix(rot))
        if any(np.linalg.norm(mid - k.pose.position) < 0.004
               and abs(jaw @ k.pose.rotation()[:, 0]) > 0.99 for k in kept):
            continue
        kept.append(GraspCandidate(pose=pose, width=width, approach=z_axis,
                                   stability=stability, contact_a=p1,
                                   contact_b=p2))

    if not kept:
        raise GraspError("no feasible grasp found on the cloud")
    kept.sort(key=lambda g: -g.stability)
    return kept[:count]


def predict_hands(object_cloud: PointCloud, obj: SceneObject, count: int,
                  seed: int, *, user_direction=(0.0, 1.0, 0.0),
                  palm_radius: float = 0.02) -> list:
    """Heuristic human hand placements at the conventional grasp region.

    Hands anchor on the object's primary standard-grasp part (body centroid
    surface when no part is annotated), offset outward along the local
    normal, approaching from the user's side of the workspace.
    """
    if count < 1:
        raise GraspError("count must be >= 1")
    rng = np.random.default_rng(seed)
    part = obj.primary_standard_part()
    anchors = object_cloud
    if part is not None:
        filtered = part_filter(object_cloud, obj, part)
        if len(filtered) > 0:
            anchors = filtered
    if len(anchors) == 0:
        raise GraspError("cannot anchor hands on an empty cloud")

    pts = anchors.points
    if part is None:
        # fall back to the surface point nearest the cloud centroid
        centroid = object_cloud.points.mean(axis=0)
        near = np.argsort(np.linalg.norm(pts - centroid, axis=1))[:max(len(pts) // 4, 1)]
        pick_from = near
    else:
        pick_from = np.arange(len(pts))

    # farthest-point anchors: hands must cover the whole region, otherwise a
    # coverage gap reads as "free space" to the grasp scorer
    chosen = [int(rng.choice(pick_from))]
    cand_pts = pts[pick_from]
    dist = np.linalg.norm(cand_pts - pts[chosen[0]], axis=1)
    while len(chosen) < min(count, len(pick_from)):
        nxt = int(np.argmax(dist))
        chosen.append(int(pick_from[nxt]))
        dist = np.minimum(dist, np.linalg.norm(cand_pts - cand_pts[nxt], axis=1))

    user_dir = normalize(np.asarray(user_direction, dtype=float))
    hands = []
    for k in range(count):
        i = chosen[k % len(chosen)]
        anchor = pts[i]
        jitter = rng.normal(0.0, 0.08, 3)
        toward = -(0.45 * user_dir + np.array([0.0, 0.0, 0.12]) + 0.1 * jitter)
        a_h = normalize(toward)
        # tight proxy: palm hovers just off the contact region and fingertips
        # land on it, so overlap with a competing gripper reads as near-zero
        # pair distances
        palm_center = anchor - 0.025 * a_h
        b1, b2 = _perp_basis(a_h)
        cloud_pts = [palm_center]
        for ring_r, ring_n in ((0.5 * palm_radius, 6), (palm_radius, 11)):
            for t in np.linspace(0, 2 * np.pi, ring_n, endpoint=False):
                cloud_pts.append(palm_center + ring_r * (np.cos(t) * b1 + np.sin(t) * b2))
        for f in range(5):
            fan = (np.cos(np.pi * (f / 4 - 0.5)) * b1
                   + np.sin(np.pi * (f / 4 - 0.5)) * b2)
            base = palm_center + palm_radius * fan
            tip = anchor + 0.008 * fan
            for t in np.linspace(0.25, 1.0, 6):
                cloud_pts.append(base + t * (tip - base))
        hands.append(HandPose(cloud=np.asarray(cloud_pts), approach=a_h,
                              anchored_part=part.name if part else None))
    return hands


def distance_measure(pc_g: np.ndarray, pc_h: np.ndarray,
                     squared: bool = True) -> float:
    """Mean pairwise separation between gripper and hand clouds.

    The default uses squared Euclidean norms; the plain-distance variant is
    available behind the flag.
    """
    g = np.atleast_2d(np.asarray(pc_g, dtype=float))
    h = np.atleast_2d(np.asarray(pc_h, dtype=float))
    if len(g) == 0 or len(h) == 0:
        raise GraspError("distance measure needs non-empty clouds")
    diff = g[:, None, :] - h[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    if squared:
        return float(sq.mean())
    return float(np.sqrt(sq).mean())


def angle_measure(a_g, a_h) -> float:
    """Opposition of approach directions: -(a_g . a_h), in [-1, 1]."""
    a = np.asarray(a_g, dtype=float)
    b = np.asarray(a_h, dtype=float)
    for v in (a, b):
        if abs(np.linalg.norm(v) - 1.0) > 1e-6:
            raise GraspError("approach vectors must be unit length")
    return float(np.clip(-(a @ b), -1.0, 1.0))


def hand_fit_score(grasps, hands, gripper: GripperModel, scale: float = 1.0,
                  squared: bool = True) -> list:
    """Joint human-robot compatibility per grasp; higher is better.

    Each grasp is scored against its worst-case hand: the hand-distance term
    (normalized by scale^2, or scale for the plain variant) plus the approach
    opposition term.
    """
    if not grasps or not hands:
        raise GraspError("hand_fit_score needs grasps and hands")
    if scale <= 0:
        raise GraspError("scale must be positive")
    denom = scale ** 2 if squared else scale
    out = []
    for g in grasps:
        pc_g = gripper.contact_cloud(g.pose, g.width)
        score = min(
            distance_measure(pc_g, h.cloud, squared=squared) / denom
            + angle_measure(g.approach, h.approach)
            for h in hands)
        out.append((g, float(score)))
    return out


@dataclass(frozen=True)
class GraspPlan:
    """Planner result: the chosen grasp plus everything needed to audit it."""

    best: GraspCandidate
    candidates: tuple
    hands: tuple = ()
    region: str = "full"            # "part" | "complement" | "full"
    part_name: str | None = None
    object_id: str = ""
    observed_points: int = 0
    completed_points: int = 0


def plan_grasp_detailed(render_out: RenderOutput, selection, holder: str,
                        scene: Scene, camera: CameraModel,
                        gripper: GripperModel, seed: int, *,
                        grasp_count: int = 48, hand_count: int = 10,
                        completion_samples: int = 3000,
                        scale: float | None = None,
                        squared_distance: bool = True) -> GraspPlan:
    """Region-constrained grasp planning for a selected object.

    With a stated holder the permitted region is the named part (robot) or
    everything but it (human); candidates are stability-ranked and both
    contacts must satisfy the region exactly. With no preference, candidates
    on the whole object are ranked by the worst-case-hand compatibility
    score. scale=None normalizes the hand-distance term by a fifth of the
    object's bounding-sphere radius, which balances it against the approach
    term at desk scale; pass an explicit scale (e.g. 1.0) for the raw sum.
    """
    obj = scene.object_by_id(selection.object_id)
    observed = extract_point_cloud(np.asarray(selection.box), render_out,
                                   camera, object_id=selection.object_id)
    observed = remove_outliers(observed)
    if len(observed) == 0:
        raise GraspError(f"object {selection.object_id!r} not visible")
    completed = complete_cloud(observed, obj, completion_samples, seed=seed)

    if holder in ("robot", "human"):
        part_name = getattr(selection, "part_name", None)
        if part_name is None:
            raise GraspError("holder preference without a named part")
        part = obj.part_by_name(part_name)
        if part is None:
            raise GraspError(
                f"part {part_name!r} not found on object {obj.name!r}")
        exclude = holder == "human"
        region_cloud = part_filter(completed, obj, part, exclude=exclude)
        if len(region_cloud) < 20:
            raise GraspError(
                f"part cloud empty: region {part_name!r} leaves too few points")
        grasps = sample_grasps(region_cloud, gripper, grasp_count, seed + 1,
                               table_top=scene.table.top_z)
        ok = []
        for g in grasps:
            contacts = np.vstack([g.contact_a, g.contact_b])
            inside = obj.part_membership(part, contacts)
            if (not exclude and inside.all()) or (exclude and not inside.any()):
                ok.append(g)
        if not ok:
            raise GraspError("no grasp satisfies the part region constraint")
        best = max(ok, key=lambda g: g.stability)
        return GraspPlan(best=best, candidates=tuple(ok),
                         region="complement" if exclude else "part",
                         part_name=part_name, object_id=obj.id,
                         observed_points=len(observed),
                         completed_points=len(completed))

    grasps = sample_grasps(completed, gripper, grasp_count, seed + 1,
                           table_top=scene.table.top_z)
    hands = predict_hands(completed, obj, hand_count, seed + 2)
    if scale is None:
        scale = 0.2 * shape_bounding_radius(obj.shape)
    scored = hand_fit_score(grasps, hands, gripper, scale=scale,
                           squared=squared_distance)
    ranked = [replace(g, hand_fit_score=s) for g, s in scored]
    best = max(ranked, key=lambda g: (g.hand_fit_score, g.stability))
    return GraspPlan(best=best, candidates=tuple(ranked), hands=tuple(hands),
                     region="full", part_name=None, object_id=obj.id,
                     observed_points=len(observed),
                     completed_points=len(completed))


def plan_grasp(render_out: RenderOutput, selection, holder: str, scene: Scene,
               camera: CameraModel, gripper: GripperModel,
               seed: int, **kwargs) -> GraspCandidate:
    """Best grasp for the selection; see plan_grasp_detailed for the audit trail."""
    return plan_grasp_detailed(render_out, selection, holder, scene, camera,
                               gripper, seed, **kwargs).best


# ---------------------------------------------------------------------------
# debug dump for the UI overlay and regression diffs

def _grasp_to_dict(g: GraspCandidate) -> dict:
    return {
        "position": [float(v) for v in g.pose.position],
        "quaternion": [float(v) for v in g.pose.quaternion],
        "width": g.width,
        "approach": [float(v) for v in g.approach],
        "stability": g.stability,
        "contact_a": [float(v) for v in g.contact_a],
        "contact_b": [float(v) for v in g.contact_b],
        "hand_fit_score": g.hand_fit_score,
    }


def grasp_plan_to_dict(plan: GraspPlan) -> dict:
    return {
        "object_id": plan.object_id,
        "region": plan.region,
        "part_name": plan.part_name,
        "observed_points": plan.observed_points,
        "completed_points": plan.completed_points,
        "best": _grasp_to_dict(plan.best),
        "candidates": [_grasp_to_dict(g) for g in plan.candidates],
        "hands": [{
            "approach": [float(v) for v in h.approach],
            "anchored_part": h.anchored_part,
            "points": len(h.cloud),
        } for h in plan.hands],
    }


def save_grasp_debug(plan: GraspPlan, path) -> None:
    Path(path).write_text(json.dumps(grasp_plan_to_dict(plan), indent=2,
                                     sort_keys=True) + "\n")
