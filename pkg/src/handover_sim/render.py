"""Analytic ray-cast rendering of tabletop scenes.

Instead of rasterizing meshes, every pixel ray is intersected with the
scene's primitives in closed form. Depths are therefore exact, which lets
point-cloud and grasp math be checked against analytic surfaces.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import RigidTransform, ray_primitive, shape_world_aabb
from .scene import Scene, SceneError

DEPTH_MAGIC = b"HSDEPTH\x00"


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera; pose maps camera frame to world (z forward, x right, y down)."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    pose: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


def default_camera(width: int = 640, height: int = 480) -> CameraModel:
    """Overhead camera 0.9 m above the table center, looking straight down."""
    # rotation diag(1,-1,-1): optical axis along world -z, image u along +x
    pose = RigidTransform(np.array([0.0, 0.0, 0.9]),
                          np.array([0.0, 1.0, 0.0, 0.0]))
    return CameraModel(fx=615.0, fy=615.0, cx=(width - 1) / 2,
                       cy=(height - 1) / 2, width=width, height=height,
                       pose=pose)


def project(points, camera: CameraModel):
    """World points -> (pixels (N,2), camera-frame depth (N,))."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    local = camera.pose.inverse().apply(pts)
    z = local[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = camera.fx * local[:, 0] / z + camera.cx
        v = camera.fy * local[:, 1] / z + camera.cy
    return np.stack([u, v], axis=1), z


def deproject(pixel, depth: float, camera: CameraModel) -> np.ndarray:
    """Pixel plus metric depth -> world point. Depth must be positive."""
    if depth <= 0:
        raise ValueError("depth must be positive")
    u, v = float(pixel[0]), float(pixel[1])
    ray = np.array([(u - camera.cx) / camera.fx,
                    (v - camera.cy) / camera.fy,
                    1.0])
    return camera.pose.apply(ray * depth)


def deproject_grid(us: np.ndarray, vs: np.ndarray, depths: np.ndarray,
                   camera: CameraModel) -> np.ndarray:
    """Vectorized deprojection of pixel arrays with matching depths."""
    rays = np.stack([(us - camera.cx) / camera.fx,
                     (vs - camera.cy) / camera.fy,
                     np.ones_like(us, dtype=float)], axis=1)
    return camera.pose.apply(rays * depths[:, None])


@dataclass(frozen=True)
class RenderOutput:
    """Z-buffer render: label and depth grids plus derived boxes and part masks."""

    labels: np.ndarray          # (H,W) int32 object index, -1 background
    depth: np.ndarray           # (H,W) float64 camera-frame depth, 0 background
    prim_index: np.ndarray      # (H,W) int16 primitive index within object
    object_ids: tuple           # object index -> id
    boxes: dict                 # object id -> (u0, v0, u1, v1), inclusive
    part_masks: dict            # (object id, part name) -> flat pixel indices

    def __post_init__(self):
        for arr in (self.labels, self.depth, self.prim_index):
            arr.setflags(write=False)

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def label_index(self, object_id: str) -> int:
        return self.object_ids.index(object_id)

    def part_mask_grid(self, object_id: str, part_name: str) -> np.ndarray:
        mask = np.zeros(self.labels.size, dtype=bool)
        mask[self.part_masks[(object_id, part_name)]] = True
        return mask.reshape(self.labels.shape)


def _pixel_window(aabb: np.ndarray, camera: CameraModel, pad: int = 2):
    """Conservative pixel bounds for a world AABB, or None if behind camera."""
    corners = np.array([[aabb[i, 0], aabb[j, 1], aabb[k, 2]]
                        for i in range(2) for j in range(2) for k in range(2)])
    uv, z = project(corners, camera)
    if np.any(z <= 1e-9):
        return 0, 0, camera.width - 1, camera.height - 1
    u0 = max(int(np.floor(uv[:, 0].min())) - pad, 0)
    v0 = max(int(np.floor(uv[:, 1].min())) - pad, 0)
    u1 = min(int(np.ceil(uv[:, 0].max())) + pad, camera.width - 1)
    v1 = min(int(np.ceil(uv[:, 1].max())) + pad, camera.height - 1)
    if u0 > u1 or v0 > v1:
        return None
    return u0, v0, u1, v1


def render(scene: Scene, camera: CameraModel) -> RenderOutput:
    """Ray-cast the scene into label/depth grids with tight boxes per object."""
    h, w = camera.height, camera.width
    depth = np.full((h, w), np.inf)
    labels = np.full((h, w), -1, dtype=np.int32)
    prim_idx = np.full((h, w), -1, dtype=np.int16)

    cam_rot = camera.pose.rotation()
    cam_pos = camera.pose.position
    us = np.arange(w, dtype=float)
    vs = np.arange(h, dtype=float)
    ray_x = (us - camera.cx) / camera.fx
    ray_y = (vs - camera.cy) / camera.fy

    for oi, obj in enumerate(scene.objects):
        for pi, pp in enumerate(obj.shape.parts):
            tf = obj.pose @ pp.offset
            # window over this primitive alone keeps the ray casting local
            aabb = shape_world_aabb(obj.shape.__class__((pp,)), obj.pose)
            win = _pixel_window(aabb, camera)
            if win is None:
                continue
            u0, v0, u1, v1 = win
            gx, gy = np.meshgrid(ray_x[u0:u1 + 1], ray_y[v0:v1 + 1])
            dirs_cam = np.stack([gx, gy, np.ones_like(gx)], axis=-1).reshape(-1, 3)
            dirs_world = dirs_cam @ cam_rot.T
            inv = tf.inverse()
            o_local = np.broadcast_to(inv.apply(cam_pos), dirs_world.shape)
            d_local = dirs_world @ inv.rotation().T
            t = ray_primitive(o_local, d_local, pp.prim)
            t = t.reshape(v1 - v0 + 1, u1 - u0 + 1)
            window_depth = depth[v0:v1 + 1, u0:u1 + 1]
            closer = t < window_depth
            if not np.any(closer):
                continue
            window_depth[closer] = t[closer]
            labels[v0:v1 + 1, u0:u1 + 1][closer] = oi
            prim_idx[v0:v1 + 1, u0:u1 + 1][closer] = pi

    boxes = {}
    for oi, obj in enumerate(scene.objects):
        rows, cols = np.nonzero(labels == oi)
        if len(rows) == 0:
            continue
        boxes[obj.id] = (int(cols.min()), int(rows.min()),
                         int(cols.max()), int(rows.max()))

    part_masks = {}
    for oi, obj in enumerate(scene.objects):
        if not obj.parts or obj.id not in boxes:
            continue
        flat = np.flatnonzero(labels == oi)
        if len(flat) == 0:
            continue
        pv, pu = np.divmod(flat, w)
        pts = deproject_grid(pu.astype(float), pv.astype(float),
                             depth[pv, pu], camera)
        local = obj.pose.inverse().apply(pts)
        hit_prim = prim_idx.reshape(-1)[flat]
        for part in obj.parts:
            member = np.isin(hit_prim, np.asarray(part.prim_indices))
            if part.clip:
                member &= part.clips_hold(local)
            part_masks[(obj.id, part.name)] = flat[member].astype(np.int64)

    depth_out = np.where(np.isfinite(depth), depth, 0.0)
    return RenderOutput(labels=labels, depth=depth_out, prim_index=prim_idx,
                        object_ids=tuple(o.id for o in scene.objects),
                        boxes=boxes, part_masks=part_masks)


# ---------------------------------------------------------------------------
# depth grid persistence: 16-byte header (8-byte magic, uint32 w, uint32 h)
# followed by row-major float32 samples

def save_depth(depth: np.ndarray, path) -> None:
    arr = np.ascontiguousarray(depth, dtype=np.float32)
    h, w = arr.shape
    with open(path, "wb") as f:
        f.write(DEPTH_MAGIC)
        f.write(struct.pack("<II", w, h))
        f.write(arr.tobytes())


def load_depth(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:8] != DEPTH_MAGIC:
        raise SceneError("not a depth grid file (bad magic)")
    w, h = struct.unpack("<II", raw[8:16])
    data = np.frombuffer(raw[16:], dtype=np.float32)
    if data.size != w * h:
        raise SceneError("depth grid payload size mismatch")
    return data.reshape(h, w).copy()
