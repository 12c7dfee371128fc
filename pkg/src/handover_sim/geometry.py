"""Rigid transforms and analytic shape primitives.

Everything downstream (rendering, point clouds, grasp math) is built on the
three primitives here: axis-aligned box, z-axis cylinder, and sphere, each
posed by a rigid transform. All shape queries (ray casting, surface distance,
surface sampling, normals) have closed forms, which is what makes the rest of
the simulator testable against hand-computed values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

Vec3 = np.ndarray


def _as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected 3-vector, got shape {a.shape}")
    return a


def normalize(v: np.ndarray) -> np.ndarray:
    """Unit vector along v; raises on zero input."""
    n = np.linalg.norm(v)
    if n < 1e-12:
        raise ValueError("cannot normalize zero-length vector")
    return np.asarray(v, dtype=float) / n


# ---------------------------------------------------------------------------
# quaternions (w, x, y, z)

def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = normalize(_as_vec3(axis))
    half = 0.5 * angle
    q = np.empty(4)
    q[0] = np.cos(half)
    q[1:] = np.sin(half) * axis
    return q


def quat_from_yaw(yaw: float) -> np.ndarray:
    """Rotation about world z."""
    return quat_from_axis_angle([0.0, 0.0, 1.0], yaw)


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_matrix(m: np.ndarray) -> np.ndarray:
    """Shepperd's method; returns (w, x, y, z) with w >= 0."""
    m = np.asarray(m, dtype=float)
    t = np.trace(m)
    if t > 0:
        s = np.sqrt(t + 1.0) * 2
        q = np.array([0.25 * s,
                      (m[2, 1] - m[1, 2]) / s,
                      (m[0, 2] - m[2, 0]) / s,
                      (m[1, 0] - m[0, 1]) / s])
    else:
        i = int(np.argmax(np.diag(m)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(m[i, i] - m[j, j] - m[k, k] + 1.0, 0.0)) * 2
        q = np.empty(4)
        q[0] = (m[k, j] - m[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (m[j, i] + m[i, j]) / s
        q[1 + k] = (m[k, i] + m[i, k]) / s
    if q[0] < 0:
        q = -q
    return q / np.linalg.norm(q)


@dataclass(frozen=True)
class RigidTransform:
    """SE(3) pose: rotate by quaternion (w,x,y,z) then translate."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    quaternion: np.ndarray = field(default_factory=quat_identity)

    def __post_init__(self):
        object.__setattr__(self, "position", _as_vec3(self.position))
        q = np.asarray(self.quaternion, dtype=float)
        if q.shape != (4,):
            raise ValueError("quaternion must have 4 components (w,x,y,z)")
        n = np.linalg.norm(q)
        if not np.isfinite(n) or abs(n - 1.0) > 1e-6:
            raise ValueError("quaternion must be unit norm")
        object.__setattr__(self, "quaternion", q / n)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform()

    @staticmethod
    def from_matrix(m: np.ndarray) -> "RigidTransform":
        m = np.asarray(m, dtype=float)
        return RigidTransform(m[:3, 3].copy(), quat_from_matrix(m[:3, :3]))

    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.quaternion)

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation()
        m[:3, 3] = self.position
        return m

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform points (3,) or (N,3) into the parent frame."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation().T + self.position

    def apply_vector(self, vectors: np.ndarray) -> np.ndarray:
        """Rotate direction vectors (no translation)."""
        return np.asarray(vectors, dtype=float) @ self.rotation().T

    def inverse(self) -> "RigidTransform":
        r_inv = self.rotation().T
        return RigidTransform(-r_inv @ self.position,
                              quat_from_matrix(r_inv))

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self then other applied from the left: result = self ∘ other."""
        return RigidTransform(
            self.apply(other.position),
            quat_multiply(self.quaternion, other.quaternion),
        )

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return self.compose(other)


# ---------------------------------------------------------------------------
# primitives (all centered at the local origin)

@dataclass(frozen=True)
class Box:
    """Axis-aligned box; size holds full extents (sx, sy, sz)."""

    size: tuple

    def __post_init__(self):
        s = tuple(float(x) for x in self.size)
        if len(s) != 3 or any(x <= 0 for x in s):
            raise ValueError("box size must be 3 positive extents")
        object.__setattr__(self, "size", s)

    @property
    def half(self) -> np.ndarray:
        return 0.5 * np.asarray(self.size)

    def area(self) -> float:
        a, b, c = self.size
        return 2.0 * (a * b + b * c + c * a)


@dataclass(frozen=True)
class Cylinder:
    """Cylinder along the local z axis."""

    radius: float
    height: float

    def __post_init__(self):
        if self.radius <= 0 or self.height <= 0:
            raise ValueError("cylinder radius/height must be positive")

    def area(self) -> float:
        return 2 * np.pi * self.radius * self.height + 2 * np.pi * self.radius ** 2


@dataclass(frozen=True)
class Sphere:
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")

    def area(self) -> float:
        return 4 * np.pi * self.radius ** 2


Primitive = Union[Box, Cylinder, Sphere]


@dataclass(frozen=True)
class PlacedPrimitive:
    """A primitive posed inside its owning shape's frame."""

    prim: Primitive
    offset: RigidTransform = field(default_factory=RigidTransform.identity)


@dataclass(frozen=True)
class Shape:
    """One primitive or a rigid composite of several."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if len(parts) == 0:
            raise ValueError("shape needs at least one primitive")
        object.__setattr__(self, "parts", parts)

    @staticmethod
    def box(sx: float, sy: float, sz: float) -> "Shape":
        return Shape((PlacedPrimitive(Box((sx, sy, sz))),))

    @staticmethod
    def cylinder(radius: float, height: float) -> "Shape":
        return Shape((PlacedPrimitive(Cylinder(radius, height)),))

    @staticmethod
    def sphere(radius: float) -> "Shape":
        return Shape((PlacedPrimitive(Sphere(radius)),))

    @staticmethod
    def composite(parts) -> "Shape":
        return Shape(tuple(parts))

    @property
    def kind(self) -> str:
        if len(self.parts) > 1:
            return "composite"
        return type(self.parts[0].prim).__name__.lower()


# ---------------------------------------------------------------------------
# ray casting (vectorized; dirs need not be unit length, t is in dir units)

_MISS = np.inf


def ray_sphere(origins: np.ndarray, dirs: np.ndarray, radius: float) -> np.ndarray:
    o = np.asarray(origins, dtype=float)
    d = np.asarray(dirs, dtype=float)
    a = np.einsum("ij,ij->i", d, d)
    b = 2.0 * np.einsum("ij,ij->i", o, d)
    c = np.einsum("ij,ij->i", o, o) - radius * radius
    disc = b * b - 4 * a * c
    t = np.full(len(o), _MISS)
    hit = disc >= 0
    if np.any(hit):
        sq = np.sqrt(disc[hit])
        t0 = (-b[hit] - sq) / (2 * a[hit])
        t1 = (-b[hit] + sq) / (2 * a[hit])
        tt = np.where(t0 > 1e-9, t0, np.where(t1 > 1e-9, t1, _MISS))
        t[hit] = tt
    return t


def ray_box(origins: np.ndarray, dirs: np.ndarray, size) -> np.ndarray:
    o = np.asarray(origins, dtype=float)
    d = np.asarray(dirs, dtype=float)
    h = 0.5 * np.asarray(size, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / d
        t1 = (-h - o) * inv
        t2 = (h - o) * inv
    # axis-parallel rays: hit iff origin within the slab
    para = np.abs(d) < 1e-15
    if np.any(para):
        inside = np.abs(o) <= h
        t1 = np.where(para, np.where(inside, -np.inf, np.inf), t1)
        t2 = np.where(para, np.where(inside, np.inf, -np.inf), t2)
    tnear = np.max(np.minimum(t1, t2), axis=1)
    tfar = np.min(np.maximum(t1, t2), axis=1)
    t = np.where(tnear > 1e-9, tnear, np.where(tfar > 1e-9, tfar, _MISS))
    return np.where(tfar >= tnear, t, _MISS)


def ray_cylinder(origins: np.ndarray, dirs: np.ndarray, radius: float,
                 height: float) -> np.ndarray:
    o = np.asarray(origins, dtype=float)
    d = np.asarray(dirs, dtype=float)
    hh = 0.5 * height
    t = np.full(len(o), _MISS)

    # curved side: quadratic in the xy plane, hit must satisfy |z| <= h/2
    a = d[:, 0] ** 2 + d[:, 1] ** 2
    b = 2.0 * (o[:, 0] * d[:, 0] + o[:, 1] * d[:, 1])
    c = o[:, 0] ** 2 + o[:, 1] ** 2 - radius * radius
    disc = b * b - 4 * a * c
    ok = (disc >= 0) & (a > 1e-15)
    if np.any(ok):
        sq = np.sqrt(disc[ok])
        for sign in (-1.0, 1.0):
            ts = (-b[ok] + sign * sq) / (2 * a[ok])
            z = o[ok, 2] + ts * d[ok, 2]
            good = (ts > 1e-9) & (np.abs(z) <= hh)
            cand = np.where(good, ts, _MISS)
            idx = np.flatnonzero(ok)
            t[idx] = np.minimum(t[idx], cand)

    # caps: plane z = +-h/2, hit must satisfy x^2+y^2 <= r^2
    dz = d[:, 2]
    movable = np.abs(dz) > 1e-15
    for zc in (-hh, hh):
        with np.errstate(divide="ignore", invalid="ignore"):
            ts = np.where(movable, (zc - o[:, 2]) / dz, np.inf)
            x = o[:, 0] + ts * d[:, 0]
            y = o[:, 1] + ts * d[:, 1]
            good = movable & (ts > 1e-9) & (x * x + y * y <= radius * radius)
        t = np.where(good & (ts < t), ts, t)
    return t


def ray_primitive(origins: np.ndarray, dirs: np.ndarray, prim: Primitive) -> np.ndarray:
    if isinstance(prim, Sphere):
        return ray_sphere(origins, dirs, prim.radius)
    if isinstance(prim, Box):
        return ray_box(origins, dirs, prim.size)
    if isinstance(prim, Cylinder):
        return ray_cylinder(origins, dirs, prim.radius, prim.height)
    raise TypeError(f"unknown primitive {type(prim)!r}")


# ---------------------------------------------------------------------------
# surface queries (points in the primitive's local frame)

def surface_distance(prim: Primitive, points: np.ndarray) -> np.ndarray:
    """Unsigned distance from each point to the primitive's surface."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(prim, Sphere):
        return np.abs(np.linalg.norm(p, axis=1) - prim.radius)
    if isinstance(prim, Box):
        h = prim.half
        q = np.abs(p) - h
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        depth = np.min(h - np.abs(p), axis=1)  # distance to the nearest face from inside
        return np.where((q > 0).any(axis=1), outside, depth)
    if isinstance(prim, Cylinder):
        rho = np.hypot(p[:, 0], p[:, 1])
        dr = rho - prim.radius
        dz = np.abs(p[:, 2]) - 0.5 * prim.height
        out_r = dr > 0
        out_z = dz > 0
        d = np.empty(len(p))
        both = out_r & out_z
        d[both] = np.hypot(dr[both], dz[both])
        d[out_r & ~out_z] = dr[out_r & ~out_z]
        d[~out_r & out_z] = dz[~out_r & out_z]
        ins = ~out_r & ~out_z
        d[ins] = np.minimum(-dr[ins], -dz[ins])
        return d
    raise TypeError(f"unknown primitive {type(prim)!r}")


def surface_normal(prim: Primitive, points: np.ndarray) -> np.ndarray:
    """Outward normal of the nearest surface patch for each local point."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(prim, Sphere):
        n = np.linalg.norm(p, axis=1, keepdims=True)
        safe = np.where(n < 1e-12, 1.0, n)
        out = p / safe
        out[n[:, 0] < 1e-12] = [0.0, 0.0, 1.0]
        return out
    if isinstance(prim, Box):
        h = prim.half
        ratio = np.abs(p) / h
        axis = np.argmax(ratio, axis=1)
        n = np.zeros_like(p)
        n[np.arange(len(p)), axis] = np.sign(
            p[np.arange(len(p)), axis] + 1e-300)
        return n
    if isinstance(prim, Cylinder):
        rho = np.hypot(p[:, 0], p[:, 1])
        side_gap = np.abs(rho - prim.radius)
        cap_gap = np.abs(np.abs(p[:, 2]) - 0.5 * prim.height)
        n = np.zeros_like(p)
        use_side = side_gap <= cap_gap
        safe = np.where(rho < 1e-12, 1.0, rho)
        n[use_side, 0] = p[use_side, 0] / safe[use_side]
        n[use_side, 1] = p[use_side, 1] / safe[use_side]
        n[~use_side, 2] = np.sign(p[~use_side, 2] + 1e-300)
        return n
    raise TypeError(f"unknown primitive {type(prim)!r}")


def contains(prim: Primitive, points: np.ndarray) -> np.ndarray:
    """Boolean inside-or-on test in the primitive's local frame."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(prim, Sphere):
        return np.linalg.norm(p, axis=1) <= prim.radius + 1e-12
    if isinstance(prim, Box):
        return (np.abs(p) <= prim.half + 1e-12).all(axis=1)
    if isinstance(prim, Cylinder):
        rho = np.hypot(p[:, 0], p[:, 1])
        return (rho <= prim.radius + 1e-12) & (np.abs(p[:, 2]) <= 0.5 * prim.height + 1e-12)
    raise TypeError(f"unknown primitive {type(prim)!r}")


def sample_surface(prim: Primitive, n: int, rng: np.random.Generator):
    """Uniform area-weighted surface samples; returns (points, normals)."""
    if n <= 0:
        return np.zeros((0, 3)), np.zeros((0, 3))
    if isinstance(prim, Sphere):
        v = rng.normal(size=(n, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return prim.radius * v, v
    if isinstance(prim, Cylinder):
        side = 2 * np.pi * prim.radius * prim.height
        cap = np.pi * prim.radius ** 2
        which = rng.choice(3, size=n, p=np.array([side, cap, cap]) / (side + 2 * cap))
        pts = np.empty((n, 3))
        nrm = np.empty((n, 3))
        ang = rng.uniform(0, 2 * np.pi, size=n)
        on_side = which == 0
        pts[on_side, 0] = prim.radius * np.cos(ang[on_side])
        pts[on_side, 1] = prim.radius * np.sin(ang[on_side])
        pts[on_side, 2] = rng.uniform(-0.5, 0.5, size=on_side.sum()) * prim.height
        nrm[on_side] = pts[on_side] * [1, 1, 0] / prim.radius
        for w, zsign in ((1, 1.0), (2, -1.0)):
            m = which == w
            r = prim.radius * np.sqrt(rng.uniform(size=m.sum()))
            pts[m, 0] = r * np.cos(ang[m])
            pts[m, 1] = r * np.sin(ang[m])
            pts[m, 2] = zsign * 0.5 * prim.height
            nrm[m] = [0.0, 0.0, zsign]
        return pts, nrm
    if isinstance(prim, Box):
        sx, sy, sz = prim.size
        areas = np.array([sy * sz, sy * sz, sx * sz, sx * sz, sx * sy, sx * sy])
        face = rng.choice(6, size=n, p=areas / areas.sum())
        u = rng.uniform(-0.5, 0.5, size=n)
        v = rng.uniform(-0.5, 0.5, size=n)
        pts = np.empty((n, 3))
        nrm = np.zeros((n, 3))
        h = prim.half
        axes = face // 2          # 0:x 1:y 2:z
        signs = np.where(face % 2 == 0, 1.0, -1.0)
        for ax in range(3):
            m = axes == ax
            o1, o2 = [a for a in range(3) if a != ax]
            pts[m, ax] = signs[m] * h[ax]
            pts[m, o1] = u[m] * prim.size[o1]
            pts[m, o2] = v[m] * prim.size[o2]
            nrm[m, ax] = signs[m]
        return pts, nrm
    raise TypeError(f"unknown primitive {type(prim)!r}")


def primitive_aabb(prim: Primitive) -> np.ndarray:
    """Local axis-aligned bounds, rows (min, max)."""
    if isinstance(prim, Sphere):
        r = prim.radius
        return np.array([[-r, -r, -r], [r, r, r]])
    if isinstance(prim, Box):
        h = prim.half
        return np.array([-h, h])
    if isinstance(prim, Cylinder):
        r, hh = prim.radius, 0.5 * prim.height
        return np.array([[-r, -r, -hh], [r, r, hh]])
    raise TypeError(f"unknown primitive {type(prim)!r}")


# ---------------------------------------------------------------------------
# shape-level helpers (shape posed by `pose` in the world frame)

def shape_world_transforms(shape: Shape, pose: RigidTransform):
    """World transform of every placed primitive in the shape."""
    return [pose @ pp.offset for pp in shape.parts]


def shape_surface_distance(shape: Shape, pose: RigidTransform,
                           points: np.ndarray) -> np.ndarray:
    """Unsigned distance from world points to the nearest shape surface."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    best = np.full(len(pts), np.inf)
    for pp, tf in zip(shape.parts, shape_world_transforms(shape, pose)):
        local = tf.inverse().apply(pts)
        best = np.minimum(best, surface_distance(pp.prim, local))
    return best


def shape_contains(shape: Shape, pose: RigidTransform, points: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    inside = np.zeros(len(pts), dtype=bool)
    for pp, tf in zip(shape.parts, shape_world_transforms(shape, pose)):
        local = tf.inverse().apply(pts)
        inside |= contains(pp.prim, local)
    return inside


def shape_nearest_primitive(shape: Shape, pose: RigidTransform,
                            points: np.ndarray) -> np.ndarray:
    """Index of the primitive whose surface is closest to each world point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dists = np.stack([
        surface_distance(pp.prim, tf.inverse().apply(pts))
        for pp, tf in zip(shape.parts, shape_world_transforms(shape, pose))
    ])
    return np.argmin(dists, axis=0)


def sample_shape_surface(shape: Shape, pose: RigidTransform, n: int,
                         rng: np.random.Generator):
    """Area-weighted surface samples over all primitives.

    Returns (points, normals, prim_index) in the world frame. Interior
    patches of composites are not culled; for the catalog shapes, component
    overlap is small enough that samples still track the outer surface.
    """
    areas = np.array([pp.prim.area() for pp in shape.parts])
    counts = rng.multinomial(n, areas / areas.sum())
    pts, nrm, idx = [], [], []
    for i, (pp, tf, k) in enumerate(zip(shape.parts,
                                        shape_world_transforms(shape, pose),
                                        counts)):
        if k == 0:
            continue
        p, nv = sample_surface(pp.prim, int(k), rng)
        pts.append(tf.apply(p))
        nrm.append(tf.apply_vector(nv))
        idx.append(np.full(int(k), i))
    if not pts:
        return np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0, dtype=int)
    return np.vstack(pts), np.vstack(nrm), np.concatenate(idx)


def shape_world_aabb(shape: Shape, pose: RigidTransform) -> np.ndarray:
    """World AABB enclosing the posed shape, rows (min, max)."""
    lo = np.full(3, np.inf)
    hi = np.full(3, -np.inf)
    for pp, tf in zip(shape.parts, shape_world_transforms(shape, pose)):
        b = primitive_aabb(pp.prim)
        corners = np.array([[b[i, 0], b[j, 1], b[k, 2]]
                            for i in range(2) for j in range(2) for k in range(2)])
        w = tf.apply(corners)
        lo = np.minimum(lo, w.min(axis=0))
        hi = np.maximum(hi, w.max(axis=0))
    return np.array([lo, hi])


def shape_bounding_radius(shape: Shape) -> float:
    """Radius of a ball around the shape origin covering every primitive."""
    r = 0.0
    for pp in shape.parts:
        b = primitive_aabb(pp.prim)
        corners = np.array([[b[i, 0], b[j, 1], b[k, 2]]
                            for i in range(2) for j in range(2) for k in range(2)])
        w = pp.offset.apply(corners)
        r = max(r, float(np.linalg.norm(w, axis=1).max()))
    return r


def min_surface_gap(shape_a: Shape, pose_a: RigidTransform,
                    shape_b: Shape, pose_b: RigidTransform,
                    samples: int = 2000, seed: int = 0) -> float:
    """Approximate closest surface-to-surface distance between two shapes.

    Brute force over sampled surfaces; negative values are clamped to 0
    (interpenetration). Accuracy scales with `samples`.
    """
    rng = np.random.default_rng(seed)
    pa, _, _ = sample_shape_surface(shape_a, pose_a, samples, rng)
    pb, _, _ = sample_shape_surface(shape_b, pose_b, samples, rng)
    d_ab = shape_surface_distance(shape_b, pose_b, pa)
    d_ba = shape_surface_distance(shape_a, pose_a, pb)
    inter = shape_contains(shape_b, pose_b, pa).any() or \
        shape_contains(shape_a, pose_a, pb).any()
    if inter:
        return 0.0
    return float(min(d_ab.min(), d_ba.min()))
