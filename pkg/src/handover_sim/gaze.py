"""Gaze geometry: direction ensemble, screen intersection, smoothing, heatmap.

The user's gaze is modeled as a ray from a calibrated head position along a
blended head/eye direction. Intersecting that ray with the monitor plane
yields a pixel of interest per frame; an exponential moving average smooths
the pixel stream, and a 2-D isotropic Gaussian centered on the smoothed pixel
becomes the focal-probability heatmap consumed by object selection.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import normalize


class GazeError(Exception):
    """Raised for degenerate or unsolvable gaze geometry."""


@dataclass(frozen=True)
class MonitorPlane:
    """Physical display plane; pixel (lam, mu) sits at origin + lam*v1 + mu*v2."""

    origin: np.ndarray
    v1: np.ndarray              # meters per pixel along the width
    v2: np.ndarray              # meters per pixel along the height
    width_px: int = 640
    height_px: int = 480

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=float)
        a = np.asarray(self.v1, dtype=float)
        b = np.asarray(self.v2, dtype=float)
        if np.linalg.norm(a) < 1e-12 or np.linalg.norm(b) < 1e-12:
            raise GazeError("monitor basis vectors must be non-zero")
        if abs(float(a @ b)) > 1e-9:
            raise GazeError("monitor basis vectors must be orthogonal")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "v1", a)
        object.__setattr__(self, "v2", b)

    def pixel_to_world(self, lam: float, mu: float) -> np.ndarray:
        return self.origin + lam * self.v1 + mu * self.v2

    def contains_pixel(self, lam: float, mu: float) -> bool:
        return 0 <= lam <= self.width_px - 1 and 0 <= mu <= self.height_px - 1


@dataclass(frozen=True)
class HeadPose:
    """Calibrated eye position in the monitor's coordinate frame."""

    position: np.ndarray
    calibrated: bool = True

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float)
        if not np.isfinite(p).all():
            raise GazeError("head position must be finite")
        object.__setattr__(self, "position", p)


@dataclass(frozen=True)
class GazeFrame:
    """One facial-camera sample: unit head and eye direction vectors."""

    head_dir: np.ndarray
    eye_dir: np.ndarray
    timestamp: float = 0.0

    def __post_init__(self):
        for name in ("head_dir", "eye_dir"):
            v = np.asarray(getattr(self, name), dtype=float)
            if abs(np.linalg.norm(v) - 1.0) > 1e-9:
                raise GazeError(f"{name} must be unit length")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class Heatmap:
    """Per-pixel focal densities, normalized to sum to 1 over the grid."""

    grid: np.ndarray
    center: tuple
    sigma_px: float
    clipped: bool = False

    def __post_init__(self):
        self.grid.setflags(write=False)

    def center_pixel(self) -> tuple:
        return (int(np.floor(self.center[0] + 0.5)),
                int(np.floor(self.center[1] + 0.5)))

    def argmax_pixel(self) -> tuple:
        v, u = np.unravel_index(int(np.argmax(self.grid)), self.grid.shape)
        return int(u), int(v)


def default_monitor(width_px: int = 640, height_px: int = 480,
                    pixel_pitch: float = 0.0005) -> MonitorPlane:
    return MonitorPlane(origin=np.zeros(3),
                        v1=np.array([pixel_pitch, 0.0, 0.0]),
                        v2=np.array([0.0, pixel_pitch, 0.0]),
                        width_px=width_px, height_px=height_px)


def default_head(monitor: MonitorPlane, distance: float = 0.6) -> HeadPose:
    center = monitor.pixel_to_world((monitor.width_px - 1) / 2,
                                    (monitor.height_px - 1) / 2)
    return HeadPose(center + np.array([0.0, 0.0, distance]))


def ensemble_direction(head_dir, eye_dir, alpha: float) -> np.ndarray:
    """Blend head and eye directions: normalize(alpha*head + (1-alpha)*eye)."""
    if not 0.0 <= alpha <= 1.0:
        raise GazeError("alpha must lie in [0, 1]")
    h = np.asarray(head_dir, dtype=float)
    g = np.asarray(eye_dir, dtype=float)
    for v, name in ((h, "head_dir"), (g, "eye_dir")):
        if abs(np.linalg.norm(v) - 1.0) > 1e-6:
            raise GazeError(f"{name} must be unit length")
    blend = alpha * h + (1.0 - alpha) * g
    n = np.linalg.norm(blend)
    if n < 1e-12:
        raise GazeError("degenerate direction: blended gaze vector is zero")
    return blend / n


def intersect_monitor(monitor: MonitorPlane, head: HeadPose,
                      direction) -> tuple:
    """Where the gaze ray meets the display; returns (lam, mu, sigma).

    Solves origin + lam*v1 + mu*v2 = head + sigma*direction as a 3x3 linear
    system. sigma is the travel distance and must come out positive.
    """
    if not head.calibrated:
        raise GazeError("head pose must be calibrated before intersection")
    d = np.asarray(direction, dtype=float)
    m = np.column_stack([monitor.v1, monitor.v2, -d])
    rhs = head.position - monitor.origin
    scale = np.abs(m).max()
    if abs(np.linalg.det(m)) < 1e-12 * scale ** 3:
        raise GazeError("no intersection: gaze is parallel to the monitor plane")
    lam, mu, sigma = np.linalg.solve(m, rhs)
    if sigma <= 0:
        raise GazeError("gaze points away from the monitor")
    return float(lam), float(mu), float(sigma)


def ema_series(points, beta: float) -> np.ndarray:
    """Autoregressive exponential moving average of a pixel stream."""
    if not 0.0 < beta <= 1.0:
        raise GazeError("beta must lie in (0, 1]")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise GazeError("cannot smooth an empty pixel stream")
    out = np.empty_like(pts)
    out[0] = pts[0]
    for k in range(1, len(pts)):
        out[k] = beta * pts[k] + (1.0 - beta) * out[k - 1]
    return out


def ema_stream(points, beta: float) -> tuple:
    """Final smoothed pixel of the stream."""
    series = ema_series(points, beta)
    return float(series[-1, 0]), float(series[-1, 1])


def build_heatmap(center, width_px: int, height_px: int,
                  sigma_px: float = 57.0) -> Heatmap:
    """Isotropic Gaussian focal density, renormalized to sum to 1.

    Centers outside the image are allowed: the visible mass is renormalized
    and the clipped flag is set.
    """
    if sigma_px <= 0:
        raise GazeError("sigma_px must be positive")
    lam, mu = float(center[0]), float(center[1])
    xs = np.arange(width_px, dtype=float)
    ys = np.arange(height_px, dtype=float)
    gx = np.exp(-0.5 * ((xs - lam) / sigma_px) ** 2)
    gy = np.exp(-0.5 * ((ys - mu) / sigma_px) ** 2)
    grid = np.outer(gy, gx)
    total = grid.sum()
    if total <= 0 or not np.isfinite(total):
        raise GazeError("heatmap has no visible mass")
    clipped = not (0 <= lam <= width_px - 1 and 0 <= mu <= height_px - 1)
    return Heatmap(grid=grid / total, center=(lam, mu), sigma_px=sigma_px,
                   clipped=clipped)


def _perturb(direction: np.ndarray, sigma_rad: float,
             rng: np.random.Generator) -> np.ndarray:
    """Small random rotation of a unit vector (tangent-plane Gaussian)."""
    if sigma_rad == 0.0:
        return direction
    ref = np.array([1.0, 0.0, 0.0])
    if abs(direction @ ref) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    t1 = normalize(np.cross(direction, ref))
    t2 = np.cross(direction, t1)
    a1, a2 = rng.normal(0.0, sigma_rad, size=2)
    return normalize(direction + a1 * t1 + a2 * t2)


def simulate_gaze(target_px, monitor: MonitorPlane, head: HeadPose,
                  noise_deg: float, n: int, seed: int,
                  frame_rate: float = 30.0) -> list:
    """Synthesize a gaze stream whose noise-free ray hits target_px exactly.

    Head and eye directions get independent angular perturbations with
    standard deviation noise_deg, so downstream smoothing and blending are
    exercised on realistic jitter. Deterministic per seed.
    """
    if n < 1:
        raise GazeError("need at least one frame")
    lam, mu = float(target_px[0]), float(target_px[1])
    if not monitor.contains_pixel(lam, mu):
        raise GazeError("target pixel lies outside the monitor")
    base = normalize(monitor.pixel_to_world(lam, mu) - head.position)
    sigma_rad = np.deg2rad(noise_deg)
    rng = np.random.default_rng(seed)
    frames = []
    for k in range(n):
        frames.append(GazeFrame(
            head_dir=_perturb(base, sigma_rad, rng),
            eye_dir=_perturb(base, sigma_rad, rng),
            timestamp=k / frame_rate,
        ))
    return frames


def frames_from_pixels(pixels, monitor: MonitorPlane, head: HeadPose,
                       frame_rate: float = 30.0) -> list:
    """Convert raw cursor pixels into exact gaze frames (console input path)."""
    frames = []
    for k, px in enumerate(pixels):
        f = simulate_gaze(px, monitor, head, noise_deg=0.0, n=1, seed=0)[0]
        frames.append(GazeFrame(f.head_dir, f.eye_dir, timestamp=k / frame_rate))
    return frames


def focal_pixels(frames, monitor: MonitorPlane, head: HeadPose,
                 alpha: float) -> np.ndarray:
    """Per-frame pixel of interest via ensemble blending and intersection."""
    pts = []
    for f in frames:
        d = ensemble_direction(f.head_dir, f.eye_dir, alpha)
        lam, mu, _ = intersect_monitor(monitor, head, d)
        pts.append((lam, mu))
    return np.asarray(pts)


def heatmap_from_frames(frames, monitor: MonitorPlane, head: HeadPose, *,
                        alpha: float = 0.3, beta: float = 0.3,
                        sigma_px: float = 57.0, width_px: int | None = None,
                        height_px: int | None = None) -> Heatmap:
    """Full per-session path: blend, intersect, smooth, then rasterize."""
    pts = focal_pixels(frames, monitor, head, alpha)
    lam, mu = ema_stream(pts, beta)
    return build_heatmap((lam, mu),
                         width_px or monitor.width_px,
                         height_px or monitor.height_px,
                         sigma_px)


# ---------------------------------------------------------------------------
# session log: one frame per line, "timestamp hx hy hz ex ey ez"

def save_gaze_log(frames, path) -> None:
    lines = []
    for f in frames:
        vals = [f.timestamp, *f.head_dir, *f.eye_dir]
        lines.append(" ".join(repr(float(v)) for v in vals))
    Path(path).write_text("\n".join(lines) + "\n")


def load_gaze_log(path) -> list:
    frames = []
    for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        vals = [float(tok) for tok in line.split()]
        if len(vals) != 7:
            raise GazeError(f"gaze log line {ln}: expected 7 floats")
        frames.append(GazeFrame(head_dir=np.array(vals[1:4]),
                                eye_dir=np.array(vals[4:7]),
                                timestamp=vals[0]))
    if not frames:
        raise GazeError("gaze log is empty")
    return frames
