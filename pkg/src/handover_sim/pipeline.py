"""End-to-end handover pipeline and session persistence.

One session runs: render the scene, turn the gaze stream into a focal
heatmap, parse the utterance, fuse both into an object selection, plan a
preference-aware grasp, then generate the approach and delivery trajectories.
Each stage's output and wall-clock time land in the session record; the first
failing stage stops the run with earlier outputs intact. Sessions serialize
to versioned JSON and can be replayed bit-for-bit.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .arm import ArmModel, home_configuration, cobot_arm
from .gaze import (GazeFrame, HeadPose, Heatmap, MonitorPlane, default_head,
                   default_monitor, heatmap_from_frames)
from .geometry import RigidTransform
from .grasp import GraspPlan, GripperModel, grasp_plan_to_dict, plan_grasp_detailed
from .motion import HandoverMotion, RMPParams, handover_plan
from .parsing import Lexicon, ParsedCommand, default_lexicon, parse
from .render import CameraModel, RenderOutput, default_camera, render
from .scene import Scene, scene_from_dict, scene_to_dict
from .selection import DetectorNoise, SelectionResult, select

SESSION_FORMAT_VERSION = 1

STAGES = ("render", "gaze", "parse", "selection", "grasp", "motion")


class PipelineError(Exception):
    """Raised for malformed session files and config mismatches."""


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob the pipeline consumes, serializable for reproducibility."""

    seed: int = 0
    image_width: int = 640
    image_height: int = 480
    alpha: float = 0.3              # head/eye blend weight
    beta: float = 0.3               # pixel-stream smoothing factor
    sigma_px: float = 30.0          # heatmap spread, matched to the render scale
    monitor_pitch: float = 0.0005   # meters per monitor pixel
    head_distance: float = 0.6
    detector: DetectorNoise = field(default_factory=DetectorNoise)
    gripper_max_width: float = 0.085
    gripper_finger_depth: float = 0.04
    grasp_count: int = 64
    hand_count: int = 10
    completion_samples: int = 4000
    hand_fit_scale: float | None = None   # None = auto (0.2 x bounding radius)
    squared_distance: bool = True
    rmp: RMPParams = field(default_factory=RMPParams)
    pregrasp_offset: float = 0.08
    table_repulsor: bool = False
    user_pose_position: tuple = (0.0, 0.42, 0.28)
    user_pose_rotvec: tuple = (2.2214415, 0.0, 0.0)  # gripper tilted toward +y

    def camera(self) -> CameraModel:
        return default_camera(self.image_width, self.image_height)

    def monitor(self) -> MonitorPlane:
        return default_monitor(self.image_width, self.image_height,
                               self.monitor_pitch)

    def head(self) -> HeadPose:
        return default_head(self.monitor(), self.head_distance)

    def gripper(self) -> GripperModel:
        return GripperModel(max_width=self.gripper_max_width,
                            finger_depth=self.gripper_finger_depth)

    def arm(self) -> ArmModel:
        return cobot_arm()

    def user_pose(self) -> RigidTransform:
        from scipy.spatial.transform import Rotation
        m = np.eye(4)
        m[:3, :3] = Rotation.from_rotvec(np.asarray(self.user_pose_rotvec)).as_matrix()
        m[:3, 3] = np.asarray(self.user_pose_position)
        return RigidTransform.from_matrix(m)


def config_to_dict(cfg: PipelineConfig) -> dict:
    out = asdict(cfg)
    out["rmp"] = asdict(cfg.rmp)
    out["detector"] = asdict(cfg.detector)
    out["user_pose_position"] = list(cfg.user_pose_position)
    out["user_pose_rotvec"] = list(cfg.user_pose_rotvec)
    return out


def config_from_dict(data: dict) -> PipelineConfig:
    data = dict(data)
    if "rmp" in data:
        data["rmp"] = RMPParams(**data["rmp"])
    if "detector" in data:
        data["detector"] = DetectorNoise(**data["detector"])
    for key in ("user_pose_position", "user_pose_rotvec"):
        if key in data:
            data[key] = tuple(data[key])
    return PipelineConfig(**data)


@dataclass
class Session:
    """Record of one pipeline run, mutable while stages execute."""

    id: str
    scene: Scene
    frames: list
    utterance: str
    config: PipelineConfig
    status: str = "pending"          # pending/selected/planned/executed/failed
    failed_stage: str | None = None
    failure_reason: str | None = None
    render_out: RenderOutput | None = None
    heatmap: Heatmap | None = None
    command: ParsedCommand | None = None
    selection: SelectionResult | None = None
    grasp_plan: GraspPlan | None = None
    motion: HandoverMotion | None = None
    timings: dict = field(default_factory=dict)
    derived: bool = False


def _session_id(scene: Scene, utterance: str, frames, cfg: PipelineConfig) -> str:
    digest = hashlib.sha256()
    digest.update(scene.id.encode())
    digest.update(str(scene.seed).encode())
    digest.update(utterance.encode())
    digest.update(str(len(frames)).encode())
    digest.update(json.dumps(config_to_dict(cfg), sort_keys=True).encode())
    return "session-" + digest.hexdigest()[:12]


def run_pipeline(scene: Scene, frames, utterance: str,
                 config: PipelineConfig | None = None,
                 lexicon: Lexicon | None = None,
                 session_id: str | None = None,
                 progress=None) -> Session:
    """Execute all stages; failures are captured in the session, not raised."""
    cfg = config or PipelineConfig()
    session = Session(
        id=session_id or _session_id(scene, utterance, frames, cfg),
        scene=scene, frames=list(frames), utterance=utterance, config=cfg)

    def emit(stage, ok, detail=None):
        if progress is not None:
            progress(stage, ok, detail)

    def run_stage(name, fn):
        emit(name, None)  # stage started
        t0 = time.perf_counter()
        try:
            result = fn()
        except Exception as exc:
            session.timings[name] = time.perf_counter() - t0
            session.status = "failed"
            session.failed_stage = name
            session.failure_reason = f"{type(exc).__name__}: {exc}"
            emit(name, False, session.failure_reason)
            return None
        session.timings[name] = time.perf_counter() - t0
        emit(name, True)
        return result

    camera = cfg.camera()
    session.render_out = run_stage("render", lambda: render(scene, camera))
    if session.render_out is None:
        return session

    session.heatmap = run_stage("gaze", lambda: heatmap_from_frames(
        session.frames, cfg.monitor(), cfg.head(), alpha=cfg.alpha,
        beta=cfg.beta, sigma_px=cfg.sigma_px, width_px=cfg.image_width,
        height_px=cfg.image_height))
    if session.heatmap is None:
        return session

    session.command = run_stage("parse", lambda: parse(
        utterance, lexicon or default_lexicon()))
    if session.command is None:
        return session

    cmd = session.command
    session.selection = run_stage("selection", lambda: select(
        cmd.object_phrase, cmd.part, cmd.holder, session.heatmap,
        session.render_out, scene, cfg.detector, seed=cfg.seed))
    if session.selection is None:
        return session
    session.status = "selected"

    session.grasp_plan = run_stage("grasp", lambda: plan_grasp_detailed(
        session.render_out, session.selection, cmd.holder, scene, camera,
        cfg.gripper(), cfg.seed, grasp_count=cfg.grasp_count,
        hand_count=cfg.hand_count, completion_samples=cfg.completion_samples,
        scale=cfg.hand_fit_scale, squared_distance=cfg.squared_distance))
    if session.grasp_plan is None:
        return session
    session.status = "planned"

    arm = cfg.arm()
    session.motion = run_stage("motion", lambda: handover_plan(
        arm, home_configuration(), session.grasp_plan.best.pose,
        cfg.user_pose(), cfg.pregrasp_offset, cfg.rmp,
        table_repulsor=cfg.table_repulsor))
    if session.motion is None:
        return session
    session.status = "executed"
    return session


# ---------------------------------------------------------------------------
# serialization

def _frames_to_list(frames) -> list:
    return [[float(f.timestamp), *map(float, f.head_dir), *map(float, f.eye_dir)]
            for f in frames]


def _frames_from_list(rows) -> list:
    return [GazeFrame(head_dir=np.asarray(r[1:4]), eye_dir=np.asarray(r[4:7]),
                      timestamp=r[0]) for r in rows]


def _trajectory_to_dict(traj) -> dict:
    return {
        "converged": traj.converged,
        "singular_steps": traj.singular_steps,
        "samples": [[float(t), *map(float, q), *map(float, qd)]
                    for t, q, qd in zip(traj.times, traj.positions,
                                        traj.velocities)],
    }


def _stage_outputs(session: Session) -> dict:
    """Deterministic, JSON-ready view of every completed stage's output."""
    out: dict = {}
    if session.render_out is not None:
        r = session.render_out
        digest = hashlib.sha256()
        digest.update(r.labels.tobytes())
        digest.update(r.depth.tobytes())
        out["render"] = {
            "boxes": {k: list(v) for k, v in sorted(r.boxes.items())},
            "object_ids": list(r.object_ids),
            "grid_sha256": digest.hexdigest(),
        }
    if session.heatmap is not None:
        h = session.heatmap
        out["gaze"] = {
            "center": [float(h.center[0]), float(h.center[1])],
            "sigma_px": float(h.sigma_px),
            "clipped": h.clipped,
            "argmax": list(h.argmax_pixel()),
        }
    if session.command is not None:
        c = session.command
        out["parse"] = {
            "object_phrase": c.object_phrase,
            "part": c.part,
            "holder": c.holder,
            "low_confidence": c.low_confidence,
            "other_objects": list(c.other_objects),
        }
    if session.selection is not None:
        s = session.selection
        out["selection"] = {
            "object_id": s.object_id,
            "box": list(s.box),
            "part_name": s.part_name,
            "region": {
                "box": list(s.part_region.box),
                "subtract": (list(s.part_region.subtract)
                             if s.part_region.subtract else None),
            } if s.part_region else None,
            "scores": [[c.object_id, list(c.box), float(c.confidence),
                        float(score)] for c, score in s.scores],
        }
    if session.grasp_plan is not None:
        out["grasp"] = grasp_plan_to_dict(session.grasp_plan)
    if session.motion is not None:
        m = session.motion
        out["motion"] = {
            "approach": _trajectory_to_dict(m.approach),
            "deliver": _trajectory_to_dict(m.deliver),
            "events": [[name, float(t)] for name, t in m.events],
        }
    return out


def session_to_dict(session: Session) -> dict:
    return {
        "format_version": SESSION_FORMAT_VERSION,
        "id": session.id,
        "status": session.status,
        "failed_stage": session.failed_stage,
        "failure_reason": session.failure_reason,
        "derived": session.derived,
        "utterance": session.utterance,
        "config": config_to_dict(session.config),
        "scene": scene_to_dict(session.scene),
        "gaze_frames": _frames_to_list(session.frames),
        "stages": _stage_outputs(session),
        "timings": {k: float(v) for k, v in session.timings.items()},
    }


def save_session(session: Session, path) -> None:
    Path(path).write_text(json.dumps(session_to_dict(session), indent=2,
                                     sort_keys=True) + "\n")


def load_session_dict(path) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PipelineError(
            f"corrupted session file (line {exc.lineno}): {exc.msg}") from exc
    version = data.get("format_version")
    if version != SESSION_FORMAT_VERSION:
        raise PipelineError(
            f"unsupported session format_version {version!r} "
            f"(expected {SESSION_FORMAT_VERSION})")
    return data


@dataclass(frozen=True)
class ReplayResult:
    session: Session
    byte_identical: bool
    derived: bool


def replay(path, config_override: PipelineConfig | None = None,
           lexicon: Lexicon | None = None) -> ReplayResult:
    """Re-run a recorded session from its own inputs.

    Without an override the stage outputs must reproduce byte-for-byte
    (determinism regression contract); with one, the result is a derived
    session and no comparison is made.
    """
    data = load_session_dict(path)
    scene = scene_from_dict(data["scene"])
    frames = _frames_from_list(data["gaze_frames"])
    cfg = config_from_dict(data["config"])
    derived = config_override is not None
    if derived:
        cfg = config_override
    session = run_pipeline(scene, frames, data["utterance"], cfg,
                           lexicon=lexicon, session_id=data["id"])
    session.derived = derived
    if derived:
        return ReplayResult(session=session, byte_identical=False, derived=True)
    old = json.dumps(data["stages"], sort_keys=True)
    new = json.dumps(_stage_outputs(session), sort_keys=True)
    return ReplayResult(session=session, byte_identical=old == new,
                        derived=False)
