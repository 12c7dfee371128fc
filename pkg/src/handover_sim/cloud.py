"""Point cloud extraction, cleanup, and completion.

Observed clouds come honestly from the renderer's z-buffer, so occlusion and
visibility effects are real. Completion, which stands in for a learned
shape-completion model, samples the full analytic surface of the known object
behind the same interface a learned completer would use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .render import CameraModel, RenderOutput, deproject_grid
from .scene import ObjectPart, SceneObject
from .geometry import sample_shape_surface


@dataclass(frozen=True)
class PointCloud:
    """World-frame point set; completed clouds carry normals and owning primitive."""

    points: np.ndarray
    source: str = "observed"
    normals: np.ndarray | None = None
    prim_index: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if not np.isfinite(pts).all():
            raise ValueError("point cloud contains non-finite coordinates")
        if self.source not in ("observed", "completed"):
            raise ValueError(f"unknown cloud source {self.source!r}")
        object.__setattr__(self, "points", pts)
        if self.normals is not None:
            nrm = np.asarray(self.normals, dtype=float).reshape(-1, 3)
            if nrm.shape != pts.shape:
                raise ValueError("normals shape must match points")
            object.__setattr__(self, "normals", nrm)
        if self.prim_index is not None:
            object.__setattr__(
                self, "prim_index",
                np.asarray(self.prim_index, dtype=int).reshape(-1))

    def __len__(self) -> int:
        return len(self.points)

    def select(self, mask: np.ndarray) -> "PointCloud":
        return PointCloud(
            self.points[mask], self.source,
            None if self.normals is None else self.normals[mask],
            None if self.prim_index is None else self.prim_index[mask])


def _region_to_flat(region, render_out: RenderOutput) -> np.ndarray:
    """Normalize a pixel box / bool grid / flat index array to flat indices."""
    h, w = render_out.labels.shape
    if isinstance(region, np.ndarray) and region.dtype == bool:
        if region.shape != (h, w):
            raise ValueError("mask shape does not match render")
        return np.flatnonzero(region)
    region = np.asarray(region)
    if region.ndim == 1 and region.size == 4:
        u0, v0, u1, v1 = (int(x) for x in region)
        if u0 > u1 or v0 > v1:
            return np.zeros(0, dtype=np.int64)
        if u0 < 0 or v0 < 0 or u1 >= w or v1 >= h:
            raise ValueError("region extends outside the image")
        uu, vv = np.meshgrid(np.arange(u0, u1 + 1), np.arange(v0, v1 + 1))
        return (vv * w + uu).reshape(-1)
    if region.ndim == 1:
        return region.astype(np.int64)
    raise ValueError("region must be a pixel box, bool mask, or flat indices")


def extract_point_cloud(region, render_out: RenderOutput, camera: CameraModel,
                        *, object_id: str | None = None) -> PointCloud:
    """Deproject every in-region pixel that has valid depth.

    With object_id set, only pixels labeled with that object contribute, so
    a box straddling two objects yields only the target's surface points.
    """
    flat = _region_to_flat(region, render_out)
    w = render_out.width
    depth_flat = render_out.depth.reshape(-1)[flat]
    keep = depth_flat > 0
    if object_id is not None:
        idx = render_out.label_index(object_id)
        keep &= render_out.labels.reshape(-1)[flat] == idx
    flat = flat[keep]
    if len(flat) == 0:
        return PointCloud(np.zeros((0, 3)), "observed")
    vs, us = np.divmod(flat, w)
    pts = deproject_grid(us.astype(float), vs.astype(float),
                         render_out.depth.reshape(-1)[flat].astype(float), camera)
    return PointCloud(pts, "observed")


def remove_outliers(cloud: PointCloud, k: int = 8,
                    std_ratio: float = 2.0) -> PointCloud:
    """Statistical outlier removal on mean k-NN distance.

    One pass: points whose mean distance to their k nearest neighbors
    exceeds (mean + std_ratio * std) of the population are dropped. Clouds
    smaller than k+1 are returned unchanged. Note that re-running the filter
    can trim further on clouds with heavy structural spacing tails (grazing
    silhouette points); evenly spaced clouds are a fixed point.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(cloud)
    if n < k + 1:
        return cloud
    tree = cKDTree(cloud.points)
    dists, _ = tree.query(cloud.points, k=k + 1)
    mean_knn = dists[:, 1:].mean(axis=1)
    keep = mean_knn <= mean_knn.mean() + std_ratio * mean_knn.std()
    return cloud.select(keep)


def complete_cloud(observed: PointCloud, obj: SceneObject, samples: int,
                   seed: int = 0) -> PointCloud:
    """Full-surface cloud of the object, covering unseen back faces.

    The observed cloud is unused beyond being the honest trigger for
    completion; the output samples the analytic surface uniformly and tags
    each point with its owning primitive and outward normal.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    pts, normals, prim_idx = sample_shape_surface(obj.shape, obj.pose,
                                                  samples, rng)
    return PointCloud(pts, "completed", normals=normals, prim_index=prim_idx)


def part_filter(cloud: PointCloud, obj: SceneObject, part: ObjectPart,
                exclude: bool = False) -> PointCloud:
    """Restrict a cloud to a named part region (or to its complement).

    Completed clouds use their exact primitive tags; untagged clouds fall
    back to nearest-primitive assignment.
    """
    pts = cloud.points
    if cloud.prim_index is not None:
        member = np.isin(cloud.prim_index, np.asarray(part.prim_indices))
        if part.clip:
            local = obj.pose.inverse().apply(pts)
            member &= part.clips_hold(local)
    else:
        member = obj.part_membership(part, pts)
    return cloud.select(~member if exclude else member)
