"""Synthetic tabletop scenes.

A scene is a table slab plus a set of rigid household objects built from
analytic primitives. Each object carries named part regions (handle, rim,
shaft, ...) stored as geometric selectors: a set of primitive indices plus an
optional half-space clip in the object frame. Both the 2-D part masks in the
renderer and the 3-D part clouds in the grasp planner derive from these
selectors, so there is a single source of truth for "where the handle is".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .geometry import (
    PlacedPrimitive,
    Box,
    Cylinder,
    RigidTransform,
    Shape,
    Sphere,
    min_surface_gap,
    quat_from_axis_angle,
    quat_from_yaw,
    shape_bounding_radius,
    shape_nearest_primitive,
    shape_world_aabb,
)

SCENE_FORMAT_VERSION = 1

# size classes by nominal width; the published bands (<1 cm, 2-4 cm, >8 cm)
# leave gaps, so the boundaries below extend them to a total order
SMALL_MAX_WIDTH = 0.015
MEDIUM_MAX_WIDTH = 0.07

MASS_CLASSES = ("small", "medium", "large")


def classify_width(width: float) -> str:
    if width < SMALL_MAX_WIDTH:
        return "small"
    if width < MEDIUM_MAX_WIDTH:
        return "medium"
    return "large"


class SceneError(Exception):
    """Raised for invalid scenes or failed scene construction."""


@dataclass(frozen=True)
class Halfspace:
    """Points p (object frame) belong iff normal . p >= offset."""

    normal: tuple
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if n.shape != (3,) or np.linalg.norm(n) < 1e-9:
            raise SceneError("halfspace normal must be a nonzero 3-vector")
        object.__setattr__(self, "normal", tuple(n / np.linalg.norm(n)))

    def holds(self, points: np.ndarray) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return p @ np.asarray(self.normal) >= self.offset - 1e-12


@dataclass(frozen=True)
class ObjectPart:
    """Named sub-region of an object used for grasp preferences.

    The region is a set of primitive indices, optionally intersected with one
    or more half-space clips in the object frame (a band needs two).
    """

    name: str
    prim_indices: tuple
    clip: Halfspace | tuple | None = None
    standard_grasp: bool = False
    primary: bool = False

    def __post_init__(self):
        idx = tuple(int(i) for i in self.prim_indices)
        if not self.name:
            raise SceneError("part name must be non-empty")
        if len(idx) == 0:
            raise SceneError(f"part {self.name!r} selects no primitives")
        object.__setattr__(self, "prim_indices", idx)
        clips = self.clip
        if clips is None:
            clips = ()
        elif isinstance(clips, Halfspace):
            clips = (clips,)
        else:
            clips = tuple(clips)
        object.__setattr__(self, "clip", clips)

    def clips_hold(self, local_points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(local_points, dtype=float))
        ok = np.ones(len(pts), dtype=bool)
        for hs in self.clip:
            ok &= hs.holds(pts)
        return ok


@dataclass(frozen=True)
class TableSlab:
    """Axis-aligned table, top face at z=0, centered on the origin."""

    width: float = 0.5
    depth: float = 0.5
    thickness: float = 0.04

    def __post_init__(self):
        if min(self.width, self.depth, self.thickness) <= 0:
            raise SceneError("table dimensions must be positive")

    @property
    def top_z(self) -> float:
        return 0.0

    def contains_footprint(self, aabb: np.ndarray, margin: float = 0.0) -> bool:
        return (aabb[0, 0] >= -self.width / 2 + margin
                and aabb[1, 0] <= self.width / 2 - margin
                and aabb[0, 1] >= -self.depth / 2 + margin
                and aabb[1, 1] <= self.depth / 2 - margin)


@dataclass(frozen=True)
class SceneObject:
    id: str
    name: str
    synonyms: tuple
    shape: Shape
    pose: RigidTransform
    parts: tuple = ()
    mass_class: str = "medium"
    nominal_width: float = 0.05

    def __post_init__(self):
        if not self.name:
            raise SceneError("object name must be non-empty")
        if self.mass_class not in MASS_CLASSES:
            raise SceneError(f"unknown mass class {self.mass_class!r}")
        if classify_width(self.nominal_width) != self.mass_class:
            raise SceneError(
                f"object {self.id!r}: width {self.nominal_width} inconsistent "
                f"with class {self.mass_class!r}")
        n_prims = len(self.shape.parts)
        primaries = 0
        for part in self.parts:
            if max(part.prim_indices) >= n_prims:
                raise SceneError(
                    f"part {part.name!r} references primitive out of range")
            if part.standard_grasp and part.primary:
                primaries += 1
        if primaries > 1:
            raise SceneError(
                f"object {self.id!r} marks more than one primary grasp part")
        object.__setattr__(self, "synonyms", tuple(self.synonyms))
        object.__setattr__(self, "parts", tuple(self.parts))

    def world_aabb(self) -> np.ndarray:
        return shape_world_aabb(self.shape, self.pose)

    def part_by_name(self, name: str) -> ObjectPart | None:
        for part in self.parts:
            if part.name == name:
                return part
        return None

    def primary_standard_part(self) -> ObjectPart | None:
        for part in self.parts:
            if part.standard_grasp and part.primary:
                return part
        for part in self.parts:
            if part.standard_grasp:
                return part
        return None

    def part_membership(self, part: ObjectPart, world_points: np.ndarray) -> np.ndarray:
        """Whether each world point belongs to the part region.

        A point belongs if its nearest primitive is one of the part's
        primitives and the optional half-space clip holds in the object frame.
        """
        pts = np.atleast_2d(np.asarray(world_points, dtype=float))
        nearest = shape_nearest_primitive(self.shape, self.pose, pts)
        member = np.isin(nearest, np.asarray(part.prim_indices))
        if part.clip:
            local = self.pose.inverse().apply(pts)
            member &= part.clips_hold(local)
        return member

    def matches_phrase(self, phrase: str) -> bool:
        """True when phrase names this object (name, synonym, or qualified name)."""
        phrase = phrase.strip().lower()
        if phrase == self.name.lower():
            return True
        if any(phrase == s.lower() for s in self.synonyms):
            return True
        # "wooden hammer" matches an object named "hammer" only through its
        # synonyms; a bare trailing match keeps adjective-qualified phrases
        # pointing at the right noun
        return phrase.endswith(" " + self.name.lower())


@dataclass(frozen=True)
class Scene:
    id: str
    seed: int
    table: TableSlab
    objects: tuple

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise SceneError("duplicate object ids in scene")

    def object_by_id(self, obj_id: str) -> SceneObject:
        for obj in self.objects:
            if obj.id == obj_id:
                return obj
        raise SceneError(f"unknown object id {obj_id!r}")

    def surface_gap(self, id_a: str, id_b: str, samples: int = 4000) -> float:
        a = self.object_by_id(id_a)
        b = self.object_by_id(id_b)
        return min_surface_gap(a.shape, a.pose, b.shape, b.pose, samples=samples)


# ---------------------------------------------------------------------------
# object catalog

@dataclass(frozen=True)
class ObjectTemplate:
    key: str
    name: str
    synonyms: tuple
    shape: Shape
    parts: tuple
    width: float
    part_synonyms: dict = field(default_factory=dict)

    def instantiate(self, instance_id: str, pose: RigidTransform,
                    extra_synonyms: tuple = ()) -> SceneObject:
        return SceneObject(
            id=instance_id,
            name=self.name,
            synonyms=self.synonyms + tuple(extra_synonyms),
            shape=self.shape,
            pose=pose,
            parts=self.parts,
            mass_class=classify_width(self.width),
            nominal_width=self.width,
        )


def _axis_x() -> np.ndarray:
    # rotation taking the local z axis onto world x (cylinders lying flat)
    return quat_from_axis_angle([0.0, 1.0, 0.0], np.pi / 2)


def _pp(prim, position=(0.0, 0.0, 0.0), quaternion=None) -> PlacedPrimitive:
    q = quat_from_yaw(0.0) if quaternion is None else quaternion
    return PlacedPrimitive(prim, RigidTransform(np.asarray(position), q))


def build_catalog() -> list:
    """The default household-object templates."""
    up = None  # identity orientation
    lie = _axis_x()
    templates = [
        ObjectTemplate(
            key="bowl", name="bowl", synonyms=("dish",),
            shape=Shape.composite([_pp(Cylinder(0.0375, 0.045), (0, 0, 0.0225))]),
            parts=(
                ObjectPart("rim", (0,), Halfspace((0, 0, 1), 0.033),
                           standard_grasp=True, primary=True),
                ObjectPart("base", (0,), Halfspace((0, 0, -1), -0.012)),
            ),
            width=0.075),
        ObjectTemplate(
            key="cup", name="cup", synonyms=("glass",),
            shape=Shape.composite([_pp(Cylinder(0.034, 0.09), (0, 0, 0.045))]),
            parts=(
                ObjectPart("rim", (0,), Halfspace((0, 0, 1), 0.075),
                           standard_grasp=True, primary=True),
                ObjectPart("base", (0,), Halfspace((0, 0, -1), -0.015)),
            ),
            width=0.068),
        ObjectTemplate(
            key="mug", name="mug", synonyms=("coffee mug",),
            shape=Shape.composite([
                _pp(Cylinder(0.04, 0.095), (0, 0, 0.0475)),
                _pp(Box((0.045, 0.015, 0.06)), (0.0625, 0, 0.0475)),
            ]),
            parts=(
                ObjectPart("handle", (1,), standard_grasp=True, primary=True),
                ObjectPart("rim", (0,), Halfspace((0, 0, 1), 0.08)),
                ObjectPart("body", (0,), Halfspace((0, 0, -1), -0.08)),
            ),
            width=0.08),
        ObjectTemplate(
            key="flashlight", name="flashlight", synonyms=("torch",),
            shape=Shape.composite([
                _pp(Cylinder(0.018, 0.15), (-0.0225, 0, 0.023), lie),
                _pp(Cylinder(0.023, 0.045), (0.075, 0, 0.023), lie),
            ]),
            parts=(
                ObjectPart("head", (1,)),
                ObjectPart("grip", (0,), standard_grasp=True, primary=True),
            ),
            width=0.195,
            part_synonyms={"handle": "grip", "body": "grip", "front": "head"}),
        ObjectTemplate(
            key="banana", name="banana", synonyms=(),
            shape=Shape.composite([_pp(Cylinder(0.015, 0.17), (0, 0, 0.015), lie)]),
            parts=(
                ObjectPart("stem", (0,), Halfspace((1, 0, 0), 0.07)),
                ObjectPart("body", (0,),
                           (Halfspace((-1, 0, 0), -0.05),
                            Halfspace((1, 0, 0), -0.06)),
                           standard_grasp=True, primary=True),
            ),
            width=0.03),
        ObjectTemplate(
            key="drill", name="drill", synonyms=("power drill",),
            shape=Shape.composite([
                _pp(Cylinder(0.019, 0.12), (0, 0, 0.06)),
                _pp(Box((0.15, 0.045, 0.055)), (0.03, 0, 0.1475)),
                _pp(Cylinder(0.005, 0.04), (0.125, 0, 0.1475), lie),
            ]),
            parts=(
                ObjectPart("handle", (0,), standard_grasp=True, primary=True),
                ObjectPart("body", (1,)),
                ObjectPart("bit", (2,)),
            ),
            width=0.038),
        ObjectTemplate(
            key="chef_can", name="chef can", synonyms=("can", "coffee can"),
            shape=Shape.composite([_pp(Cylinder(0.04, 0.14), (0, 0, 0.07))]),
            parts=(
                ObjectPart("lid", (0,), Halfspace((0, 0, 1), 0.105)),
                ObjectPart("body", (0,),
                           (Halfspace((0, 0, -1), -0.105),
                            Halfspace((0, 0, 1), 0.015)),
                           standard_grasp=True, primary=True),
            ),
            width=0.08),
        ObjectTemplate(
            key="fish_can", name="fish can", synonyms=("can", "tuna can"),
            shape=Shape.composite([_pp(Cylinder(0.037, 0.035), (0, 0, 0.0175))]),
            parts=(
                ObjectPart("lid", (0,), Halfspace((0, 0, 1), 0.028)),
                ObjectPart("body", (0,), Halfspace((0, 0, -1), -0.028),
                           standard_grasp=True, primary=True),
            ),
            width=0.074),
        ObjectTemplate(
            key="screwdriver", name="screwdriver", synonyms=(),
            shape=Shape.composite([
                _pp(Cylinder(0.016, 0.105), (-0.0675, 0, 0.016), lie),
                _pp(Cylinder(0.004, 0.125), (0.0475, 0, 0.016), lie),
            ]),
            parts=(
                ObjectPart("handle", (0,), standard_grasp=True, primary=True),
                ObjectPart("shaft", (1,)),
                ObjectPart("tip", (1,), Halfspace((1, 0, 0), 0.1)),
            ),
            width=0.032),
        ObjectTemplate(
            key="scissors", name="scissors", synonyms=("shears",),
            shape=Shape.composite([
                _pp(Box((0.09, 0.02, 0.008)), (0.045, 0, 0.004)),
                _pp(Box((0.08, 0.045, 0.012)), (-0.04, 0, 0.006)),
            ]),
            parts=(
                ObjectPart("blades", (0,)),
                ObjectPart("handles", (1,), standard_grasp=True, primary=True),
            ),
            width=0.045,
            part_synonyms={"holes": "handles", "handle": "handles",
                           "blade": "blades"}),
        ObjectTemplate(
            key="pear", name="pear", synonyms=(),
            shape=Shape.composite([_pp(Sphere(0.033), (0, 0, 0.033))]),
            parts=(), width=0.066),
        ObjectTemplate(
            key="strawberry", name="strawberry", synonyms=("berry",),
            shape=Shape.composite([_pp(Sphere(0.0175), (0, 0, 0.0175))]),
            parts=(), width=0.035),
        ObjectTemplate(
            key="small_clamp", name="small clamp", synonyms=("clamp",),
            shape=Shape.composite([_pp(Box((0.07, 0.022, 0.015)), (0, 0, 0.0075))]),
            parts=(), width=0.022),
        ObjectTemplate(
            key="medium_clamp", name="medium clamp", synonyms=("clamp",),
            shape=Shape.composite([_pp(Box((0.09, 0.03, 0.02)), (0, 0, 0.01))]),
            parts=(), width=0.03),
        ObjectTemplate(
            key="large_clamp", name="large clamp", synonyms=("clamp",),
            shape=Shape.composite([_pp(Box((0.125, 0.04, 0.025)), (0, 0, 0.0125))]),
            parts=(), width=0.04),
        ObjectTemplate(
            key="eraser", name="eraser", synonyms=("pencil eraser", "rubber"),
            shape=Shape.composite([_pp(Box((0.04, 0.008, 0.01)), (0, 0, 0.005))]),
            parts=(), width=0.008),
    ]
    return templates


def catalog_by_key(catalog=None) -> dict:
    catalog = build_catalog() if catalog is None else catalog
    return {t.key: t for t in catalog}


def with_descriptor(template: ObjectTemplate, descriptor: str) -> ObjectTemplate:
    """Variant of a template distinguished by an attribute like a color.

    The descriptor becomes part of the instance synonyms ("red flashlight")
    so adjective-qualified commands can single it out, while the bare name
    stays ambiguous between variants.
    """
    qualified = f"{descriptor} {template.name}"
    return replace(template,
                   key=f"{descriptor}_{template.key}",
                   synonyms=template.synonyms + (qualified, descriptor))


# ---------------------------------------------------------------------------
# scene generation

def _footprint_with_margin(aabb: np.ndarray, margin: float) -> np.ndarray:
    lo = aabb[0, :2] - margin
    hi = aabb[1, :2] + margin
    return np.array([lo, hi])


def _rects_overlap(a: np.ndarray, b: np.ndarray) -> bool:
    return not (a[1, 0] <= b[0, 0] or b[1, 0] <= a[0, 0]
                or a[1, 1] <= b[0, 1] or b[1, 1] <= a[0, 1])


def generate_scene(seed: int, object_count: int, catalog=None, *,
                   table: TableSlab | None = None, min_gap: float = 0.01,
                   max_attempts: int = 500, scene_id: str | None = None) -> Scene:
    """Rejection-sample a non-overlapping tabletop arrangement.

    Deterministic for a given (seed, object_count, catalog). Raises
    SceneError("scene overflow ...") when an object cannot be placed within
    max_attempts tries.
    """
    if object_count < 1:
        raise SceneError("object_count must be >=1")
    catalog = build_catalog() if catalog is None else list(catalog)
    if len(catalog) == 0:
        raise SceneError("catalog must be non-empty")
    table = table or TableSlab()
    rng = np.random.default_rng(seed)

    if object_count <= len(catalog):
        order = rng.permutation(len(catalog))[:object_count]
        chosen = [catalog[i] for i in order]
    else:
        chosen = [catalog[i] for i in rng.integers(0, len(catalog), object_count)]

    # place the bulkiest templates first; tight packings fail far less often
    placement_order = sorted(range(len(chosen)),
                             key=lambda i: -shape_bounding_radius(chosen[i].shape))

    placed_objects: dict = {}
    footprints = []          # list of per-primitive margin rects per object
    counts: dict = {}
    for idx in placement_order:
        template = chosen[idx]
        placed = False
        for _ in range(max_attempts):
            yaw = rng.uniform(0, 2 * np.pi)
            x = rng.uniform(-table.width / 2, table.width / 2)
            y = rng.uniform(-table.depth / 2, table.depth / 2)
            pose = RigidTransform(np.array([x, y, table.top_z]), quat_from_yaw(yaw))
            aabb = shape_world_aabb(template.shape, pose)
            if not table.contains_footprint(aabb):
                continue
            # per-primitive rectangles hug elongated shapes at odd yaws far
            # better than one whole-shape box
            rects = [_footprint_with_margin(
                shape_world_aabb(Shape((pp,)), pose), min_gap / 2)
                for pp in template.shape.parts]
            if any(_rects_overlap(r, other)
                   for other_rects in footprints for other in other_rects
                   for r in rects):
                continue
            k = counts.get(template.key, 0)
            counts[template.key] = k + 1
            obj_id = f"{template.key}-{k}"
            placed_objects[idx] = template.instantiate(obj_id, pose)
            footprints.append(rects)
            placed = True
            break
        if not placed:
            raise SceneError(
                f"scene overflow: could not place {template.key!r} after "
                f"{max_attempts} attempts")

    objects = [placed_objects[i] for i in range(len(chosen))]
    scene = Scene(id=scene_id or f"scene-{seed}", seed=int(seed),
                  table=table, objects=tuple(objects))
    validate_scene(scene)
    return scene


def place_identical_pair(template: ObjectTemplate, gap: float, *,
                         yaw: float = 0.0, table: TableSlab | None = None,
                         descriptors=("left", "right"),
                         scene_id: str | None = None, seed: int = 0) -> Scene:
    """Two copies of one template separated along x by an exact surface gap."""
    if gap < 0:
        raise SceneError("gap must be non-negative")
    table = table or TableSlab()
    q = quat_from_yaw(yaw)
    aabb = shape_world_aabb(template.shape,
                            RigidTransform(np.zeros(3), q))
    x_a = -gap / 2 - aabb[1, 0]
    x_b = gap / 2 - aabb[0, 0]
    variants = [with_descriptor(template, d) for d in descriptors]
    objects = [
        variants[0].instantiate(f"{template.key}-a",
                                RigidTransform(np.array([x_a, 0.0, table.top_z]), q)),
        variants[1].instantiate(f"{template.key}-b",
                                RigidTransform(np.array([x_b, 0.0, table.top_z]), q)),
    ]
    scene = Scene(id=scene_id or f"pair-{template.key}-{gap:.4f}",
                  seed=seed, table=table, objects=tuple(objects))
    return scene


def validate_scene(scene: Scene) -> None:
    """Check scene invariants; raises SceneError on violation."""
    for obj in scene.objects:
        aabb = obj.world_aabb()
        if not scene.table.contains_footprint(aabb):
            raise SceneError(f"object {obj.id!r} extends beyond the table")
    for i, a in enumerate(scene.objects):
        box_a = a.world_aabb()
        for b in scene.objects[i + 1:]:
            box_b = b.world_aabb()
            if _rects_overlap(box_a[:, :2], box_b[:, :2]) and \
                    not (box_a[1, 2] <= box_b[0, 2] or box_b[1, 2] <= box_a[0, 2]):
                gap = min_surface_gap(a.shape, a.pose, b.shape, b.pose,
                                      samples=1500)
                if gap <= 0:
                    raise SceneError(f"objects {a.id!r} and {b.id!r} interpenetrate")


# ---------------------------------------------------------------------------
# serialization

def _prim_to_dict(pp: PlacedPrimitive) -> dict:
    prim = pp.prim
    if isinstance(prim, Box):
        body = {"type": "box", "size": list(prim.size)}
    elif isinstance(prim, Cylinder):
        body = {"type": "cylinder", "radius": prim.radius, "height": prim.height}
    elif isinstance(prim, Sphere):
        body = {"type": "sphere", "radius": prim.radius}
    else:
        raise SceneError(f"cannot serialize primitive {type(prim)!r}")
    body["offset"] = _tf_to_dict(pp.offset)
    return body


def _prim_from_dict(d: dict) -> PlacedPrimitive:
    kind = d["type"]
    if kind == "box":
        prim = Box(tuple(d["size"]))
    elif kind == "cylinder":
        prim = Cylinder(d["radius"], d["height"])
    elif kind == "sphere":
        prim = Sphere(d["radius"])
    else:
        raise SceneError(f"unknown primitive type {kind!r}")
    return PlacedPrimitive(prim, _tf_from_dict(d["offset"]))


def _tf_to_dict(tf: RigidTransform) -> dict:
    return {"position": [float(v) for v in tf.position],
            "quaternion": [float(v) for v in tf.quaternion]}


def _tf_from_dict(d: dict) -> RigidTransform:
    return RigidTransform(np.asarray(d["position"], dtype=float),
                          np.asarray(d["quaternion"], dtype=float))


def _part_to_dict(part: ObjectPart) -> dict:
    out = {"name": part.name, "prim_indices": list(part.prim_indices),
           "standard_grasp": part.standard_grasp, "primary": part.primary}
    if part.clip:
        out["clip"] = [{"normal": list(hs.normal), "offset": hs.offset}
                       for hs in part.clip]
    return out


def _part_from_dict(d: dict) -> ObjectPart:
    raw = d.get("clip") or []
    if isinstance(raw, dict):
        raw = [raw]
    clip = tuple(Halfspace(tuple(h["normal"]), h["offset"]) for h in raw)
    return ObjectPart(d["name"], tuple(d["prim_indices"]), clip,
                      d.get("standard_grasp", False), d.get("primary", False))


def scene_to_dict(scene: Scene) -> dict:
    return {
        "format_version": SCENE_FORMAT_VERSION,
        "id": scene.id,
        "seed": scene.seed,
        "table": {"width": scene.table.width, "depth": scene.table.depth,
                  "thickness": scene.table.thickness},
        "objects": [{
            "id": o.id,
            "name": o.name,
            "synonyms": list(o.synonyms),
            "mass_class": o.mass_class,
            "nominal_width": o.nominal_width,
            "pose": _tf_to_dict(o.pose),
            "shape": [_prim_to_dict(pp) for pp in o.shape.parts],
            "parts": [_part_to_dict(p) for p in o.parts],
        } for o in scene.objects],
    }


def scene_from_dict(data: dict) -> Scene:
    version = data.get("format_version")
    if version != SCENE_FORMAT_VERSION:
        raise SceneError(
            f"unsupported scene format_version {version!r} "
            f"(expected {SCENE_FORMAT_VERSION})")
    t = data["table"]
    table = TableSlab(t["width"], t["depth"], t["thickness"])
    objects = []
    for od in data["objects"]:
        objects.append(SceneObject(
            id=od["id"],
            name=od["name"],
            synonyms=tuple(od.get("synonyms", ())),
            shape=Shape(tuple(_prim_from_dict(p) for p in od["shape"])),
            pose=_tf_from_dict(od["pose"]),
            parts=tuple(_part_from_dict(p) for p in od.get("parts", ())),
            mass_class=od["mass_class"],
            nominal_width=od["nominal_width"],
        ))
    return Scene(id=data["id"], seed=int(data["seed"]), table=table,
                 objects=tuple(objects))


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2,
                                     sort_keys=True) + "\n")


def load_scene(path) -> Scene:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SceneError(f"invalid scene file: {exc}") from exc
    return scene_from_dict(data)
