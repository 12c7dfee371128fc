"""Multimodal object selection: language-grounded candidates fused with gaze.

A lexicon detector over scene ground truth (with a seeded noise model
standing in for a learned grounding model) proposes candidate boxes for the
commanded object phrase. Each candidate is scored by the gaze-heatmap
probability mass inside its box, the argmax wins, and the named holding part
is resolved into a pixel region whose shape depends on who holds it: the part
box itself for the robot, the object box minus the part for the human.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaze import Heatmap
from .render import RenderOutput
from .scene import Scene


class SelectionError(Exception):
    """Raised when no candidate can be selected or a part cannot be resolved."""


# part-name aliases accepted when resolving the holding part against renders
PART_ALIASES = {
    "handle": ("handle", "handles", "grip"),
    "handles": ("handles", "handle", "grip"),
    "grip": ("grip", "handle"),
    "hole": ("handles",),
    "holes": ("handles",),
    "blade": ("blades", "blade"),
    "body": ("body", "grip"),
    "tip": ("tip", "bit"),
    "front": ("head",),
    "cap": ("lid",),
}


@dataclass(frozen=True)
class DetectorNoise:
    """Noise knobs for the stand-in detector; all rates are per candidate."""

    miss_rate: float = 0.02
    confidence_jitter: float = 0.08
    false_positive_rate: float = 0.05
    base_confidence: float = 0.85
    adjective_matching: bool = True

    def __post_init__(self):
        for name in ("miss_rate", "confidence_jitter", "false_positive_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise SelectionError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class Candidate:
    """Detector proposal: object id, pixel box, and detection confidence."""

    object_id: str
    box: tuple                   # (u0, v0, u1, v1) inclusive
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise SelectionError("confidence must lie in [0, 1]")
        object.__setattr__(self, "box", tuple(int(v) for v in self.box))


@dataclass(frozen=True)
class PixelRegion:
    """Pixel region as an outer box with an optional subtracted box."""

    box: tuple
    subtract: tuple | None = None

    def mask(self, width: int, height: int) -> np.ndarray:
        m = np.zeros((height, width), dtype=bool)
        u0, v0, u1, v1 = self.box
        m[v0:v1 + 1, u0:u1 + 1] = True
        if self.subtract is not None:
            s0, t0, s1, t1 = self.subtract
            m[t0:t1 + 1, s0:s1 + 1] = False
        return m

    def pixel_count(self) -> int:
        u0, v0, u1, v1 = self.box
        area = (u1 - u0 + 1) * (v1 - v0 + 1)
        if self.subtract is not None:
            s0, t0, s1, t1 = self.subtract
            area -= max(0, (min(s1, u1) - max(s0, u0) + 1)) * \
                max(0, (min(t1, v1) - max(t0, v0) + 1))
        return area


@dataclass(frozen=True)
class SelectionResult:
    """Chosen object with its fusion scores and the resolved holding region."""

    object_id: str
    box: tuple
    scores: tuple                # ((candidate, fused score), ...) all candidates
    part_region: PixelRegion | None = None
    part_name: str | None = None


def _intersect_boxes(a, b):
    u0, v0 = max(a[0], b[0]), max(a[1], b[1])
    u1, v1 = min(a[2], b[2]), min(a[3], b[3])
    if u0 > u1 or v0 > v1:
        return None
    return (u0, v0, u1, v1)


def _box_area(box) -> int:
    return (box[2] - box[0] + 1) * (box[3] - box[1] + 1)


def detect_candidates(object_phrase: str, render_out: RenderOutput,
                      scene: Scene, noise: DetectorNoise | None = None,
                      seed: int = 0) -> list:
    """Ground the object phrase against visible scene objects.

    Every visible object whose name or synonyms match the phrase becomes a
    candidate. When the phrase carries a qualifier that matches some object
    exactly ("red flashlight"), bare-noun matches are dropped so the
    qualified object ranks alone. The noise model can drop matches, jitter
    confidences, and inject spurious boxes, deterministically per seed.
    """
    noise = noise or DetectorNoise()
    rng = np.random.default_rng(seed)
    phrase = object_phrase.strip().lower()

    exact, loose = [], []
    for obj in scene.objects:
        if obj.id not in render_out.boxes:
            continue
        if phrase == obj.name.lower() or any(phrase == s.lower()
                                             for s in obj.synonyms):
            exact.append(obj)
        elif obj.matches_phrase(phrase):
            loose.append(obj)
    matched = exact if (exact and noise.adjective_matching) else exact + loose

    candidates = []
    for obj in matched:
        if noise.miss_rate > 0 and rng.random() < noise.miss_rate:
            continue
        conf = noise.base_confidence \
            + rng.uniform(-noise.confidence_jitter, noise.confidence_jitter)
        candidates.append(Candidate(obj.id, render_out.boxes[obj.id],
                                    float(np.clip(conf, 0.0, 1.0))))

    if noise.false_positive_rate > 0 and rng.random() < noise.false_positive_rate:
        spurious = [o for o in scene.objects
                    if o.id in render_out.boxes and o not in matched]
        if spurious:
            obj = spurious[int(rng.integers(len(spurious)))]
            candidates.append(Candidate(obj.id, render_out.boxes[obj.id],
                                        float(rng.uniform(0.2, 0.5))))
    return candidates


def score_candidates(heatmap: Heatmap, candidates) -> list:
    """Gaze-mass fusion score per candidate: heatmap density summed in the box."""
    grid = heatmap.grid
    out = []
    for cand in candidates:
        u0, v0, u1, v1 = cand.box
        if u1 >= grid.shape[1] or v1 >= grid.shape[0]:
            raise SelectionError("candidate box exceeds heatmap dimensions")
        out.append((cand, float(grid[v0:v1 + 1, u0:u1 + 1].sum())))
    return out


def select_object(scored) -> tuple:
    """Argmax by fusion score; ties break by confidence then object id."""
    scored = list(scored)
    if not scored:
        raise SelectionError("no candidates to select from")
    return min(scored, key=lambda cs: (-cs[1], -cs[0].confidence,
                                       cs[0].object_id))


def resolve_part(chosen: Candidate, part_phrase: str, holder: str,
                 render_out: RenderOutput, scene: Scene) -> tuple:
    """Locate the holding part and shape the permitted pixel region.

    The part box is the best-overlap part detection against the chosen box.
    Robot holder keeps the part (intersected with the object box); human
    holder keeps the complement within the object box.
    """
    names = PART_ALIASES.get(part_phrase.lower(), (part_phrase.lower(),))
    obj = scene.object_by_id(chosen.object_id)
    if not any(obj.part_by_name(n) for n in names):
        raise SelectionError(
            f"part {part_phrase!r} not found on object {obj.name!r}")

    best = None
    for (obj_id, part_name), flat in render_out.part_masks.items():
        if part_name not in names or len(flat) == 0:
            continue
        vs, us = np.divmod(flat, render_out.width)
        part_box = (int(us.min()), int(vs.min()), int(us.max()), int(vs.max()))
        inter = _intersect_boxes(chosen.box, part_box)
        overlap = _box_area(inter) if inter else 0
        if best is None or overlap > best[0]:
            best = (overlap, obj_id, part_name, part_box)
    if best is None or best[0] == 0:
        raise SelectionError(
            f"part {part_phrase!r} not visible near the selected object")
    _, _, part_name, part_box = best
    inter = _intersect_boxes(chosen.box, part_box)

    if holder == "robot":
        region = PixelRegion(box=inter)
    elif holder == "human":
        region = PixelRegion(box=chosen.box, subtract=inter)
    else:
        region = PixelRegion(box=chosen.box)
    return region, part_name


def select(object_phrase: str, part_phrase: str | None, holder: str,
           heatmap: Heatmap, render_out: RenderOutput, scene: Scene,
           noise: DetectorNoise | None = None, seed: int = 0) -> SelectionResult:
    """Full selection pass: detect, fuse with gaze, resolve the part region."""
    candidates = detect_candidates(object_phrase, render_out, scene, noise, seed)
    scored = score_candidates(heatmap, candidates)
    chosen, _ = select_object(scored)
    part_region, part_name = None, None
    if part_phrase is not None:
        part_region, part_name = resolve_part(chosen, part_phrase, holder,
                                              render_out, scene)
    else:
        part_region = PixelRegion(box=chosen.box)
    return SelectionResult(object_id=chosen.object_id, box=chosen.box,
                           scores=tuple(scored), part_region=part_region,
                           part_name=part_name)


# ---------------------------------------------------------------------------
# gaze evaluation metrics

@dataclass(frozen=True)
class GazeSession:
    """One evaluation trial: the heatmap, all candidate boxes, and the truth."""

    heatmap: Heatmap
    boxes: dict
    true_id: str


@dataclass(frozen=True)
class GazeEvalReport:
    success_rate: float
    eval_iou: float
    mse_px: float

    def __post_init__(self):
        if not (0.0 <= self.success_rate <= 1.0 and 0.0 <= self.eval_iou <= 1.0
                and self.mse_px >= 0.0):
            raise SelectionError("gaze report fields out of range")


def _distance_to_box(point, box) -> float:
    u, v = point
    u0, v0, u1, v1 = box
    du = max(u0 - u, 0.0, u - u1)
    dv = max(v0 - v, 0.0, v - v1)
    return float(np.hypot(du, dv))


def evaluate_gaze(sessions, support_threshold: float = 0.01) -> GazeEvalReport:
    """Success rate, density-overlap IoU, and failure shift of gaze sessions.

    Success: the box with the largest density mass is the true object's.
    IoU: per session, the peak-normalized density summed inside the predicted
    box divided by the pixel area of the union of that box and the
    thresholded heatmap support. Shift (reported as mse_px): mean pixel
    distance from the heatmap center to the true box, over failures only.
    """
    sessions = list(sessions)
    if not sessions:
        raise SelectionError("no gaze sessions to evaluate")
    successes = 0
    ious = []
    shifts = []
    for s in sessions:
        masses = {oid: float(s.heatmap.grid[b[1]:b[3] + 1, b[0]:b[2] + 1].sum())
                  for oid, b in s.boxes.items()}
        pred = max(masses, key=lambda k: (masses[k], k))
        grid = s.heatmap.grid
        peak = grid / grid.max()
        support = peak >= support_threshold
        b = s.boxes[pred]
        box_mask = np.zeros_like(support)
        box_mask[b[1]:b[3] + 1, b[0]:b[2] + 1] = True
        union = np.count_nonzero(support | box_mask)
        ious.append(float(peak[box_mask].sum()) / union if union else 0.0)
        if pred == s.true_id:
            successes += 1
        else:
            shifts.append(_distance_to_box(s.heatmap.center, s.boxes[s.true_id]))
    return GazeEvalReport(
        success_rate=successes / len(sessions),
        eval_iou=float(np.mean(ious)),
        mse_px=float(np.mean(shifts)) if shifts else 0.0,
    )
