"""HTTP + WebSocket service wrapping the pipeline for interactive clients.

The operator console is a thin client: it posts cursor pixels or raw gaze
frames, submits an utterance, triggers the run, and renders whatever the
service reports back (heatmap center, candidate scores, chosen grasp,
trajectory samples). All math happens here.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from .gaze import GazeFrame, frames_from_pixels, heatmap_from_frames
from .parsing import default_lexicon, parse
from .pipeline import (PipelineConfig, Session, config_from_dict,
                       run_pipeline, session_to_dict)
from .render import render
from .scene import Scene, generate_scene


@dataclass
class SessionState:
    id: str
    scene_id: str
    config: PipelineConfig
    frames: list = field(default_factory=list)
    utterance: str | None = None
    result: Session | None = None
    events: list = field(default_factory=list)

    def push(self, kind: str, **payload):
        self.events.append({"seq": len(self.events), "kind": kind, **payload})


@dataclass
class ServiceState:
    scenes: dict = field(default_factory=dict)
    renders: dict = field(default_factory=dict)
    sessions: dict = field(default_factory=dict)
    counter: int = 0


def _object_color(object_id: str) -> str:
    digest = hashlib.md5(object_id.encode()).digest()
    r, g, b = (96 + digest[0] % 160, 96 + digest[1] % 160, 96 + digest[2] % 160)
    return f"#{r:02x}{g:02x}{b:02x}"


def create_app(state: ServiceState | None = None) -> FastAPI:
    app = FastAPI(title="handover-sim service")
    st = state or ServiceState()
    app.state.service = st

    def get_scene(scene_id: str) -> Scene:
        if scene_id not in st.scenes:
            raise HTTPException(404, f"unknown scene {scene_id!r}")
        return st.scenes[scene_id]

    def get_session(session_id: str) -> SessionState:
        if session_id not in st.sessions:
            raise HTTPException(404, f"unknown session {session_id!r}")
        return st.sessions[session_id]

    @app.post("/scenes")
    def create_scene(body: dict):
        seed = int(body.get("seed", 0))
        count = int(body.get("object_count", 9))
        try:
            scene = generate_scene(seed, count)
        except Exception as exc:
            raise HTTPException(400, str(exc))
        st.scenes[scene.id] = scene
        return {"scene_id": scene.id,
                "objects": [{"id": o.id, "name": o.name,
                             "mass_class": o.mass_class}
                            for o in scene.objects]}

    @app.post("/scenes/import")
    def import_scene(body: dict):
        from .scene import scene_from_dict
        try:
            scene = scene_from_dict(body)
        except Exception as exc:
            raise HTTPException(400, str(exc))
        st.scenes[scene.id] = scene
        # imported content may differ from a previously cached render
        for key in [k for k in st.renders if k[0] == scene.id]:
            del st.renders[key]
        return {"scene_id": scene.id}

    def _render_for(scene: Scene, cfg: PipelineConfig):
        key = (scene.id, cfg.image_width, cfg.image_height)
        if key not in st.renders:
            st.renders[key] = render(scene, cfg.camera())
        return st.renders[key]

    @app.get("/scenes/{scene_id}/render")
    def scene_render(scene_id: str):
        scene = get_scene(scene_id)
        cfg = PipelineConfig()
        r = _render_for(scene, cfg)
        labels8 = (r.labels + 1).astype(np.uint8)
        palette = {0: {"id": None, "name": "background", "color": "#101014"}}
        for idx, oid in enumerate(r.object_ids):
            obj = scene.object_by_id(oid)
            palette[idx + 1] = {"id": oid, "name": obj.name,
                                "color": _object_color(oid)}
        valid = r.depth[r.depth > 0]
        return {
            "width": r.width,
            "height": r.height,
            "labels_b64": base64.b64encode(labels8.tobytes()).decode(),
            "palette": palette,
            "boxes": {k: list(v) for k, v in r.boxes.items()},
            "depth_range": ([float(valid.min()), float(valid.max())]
                            if len(valid) else [0.0, 0.0]),
        }

    @app.post("/sessions")
    def create_session(body: dict):
        scene = get_scene(body.get("scene_id", ""))
        cfg = PipelineConfig()
        if body.get("config"):
            cfg = config_from_dict(body["config"])
        st.counter += 1
        sid = f"live-{st.counter:04d}"
        st.sessions[sid] = SessionState(id=sid, scene_id=scene.id, config=cfg)
        return {"session_id": sid}

    @app.post("/sessions/{session_id}/gaze")
    def add_gaze(session_id: str, body: dict):
        sess = get_session(session_id)
        cfg = sess.config
        if "pixels" in body:
            # console cursor path: converted to direction vectors so the
            # full blend/intersect/smooth path runs on every frame
            frames = frames_from_pixels(body["pixels"], cfg.monitor(),
                                        cfg.head())
        elif "frames" in body:
            frames = [GazeFrame(head_dir=np.asarray(row[1:4]),
                                eye_dir=np.asarray(row[4:7]),
                                timestamp=row[0]) for row in body["frames"]]
        else:
            raise HTTPException(400, "body needs 'pixels' or 'frames'")
        sess.frames.extend(frames)
        heatmap = heatmap_from_frames(
            sess.frames, cfg.monitor(), cfg.head(), alpha=cfg.alpha,
            beta=cfg.beta, sigma_px=cfg.sigma_px, width_px=cfg.image_width,
            height_px=cfg.image_height)
        center = [float(heatmap.center[0]), float(heatmap.center[1])]
        sess.push("heatmap", center=center, sigma_px=float(heatmap.sigma_px))
        return {"frames": len(sess.frames), "heatmap_center": center,
                "sigma_px": float(heatmap.sigma_px)}

    @app.post("/sessions/{session_id}/command")
    def set_command(session_id: str, body: dict):
        sess = get_session(session_id)
        utterance = body.get("utterance", "")
        try:
            cmd = parse(utterance, default_lexicon())
        except Exception as exc:
            raise HTTPException(422, f"cannot parse: {exc}")
        sess.utterance = utterance
        sess.push("command", object_phrase=cmd.object_phrase, part=cmd.part,
                  holder=cmd.holder)
        return {"object_phrase": cmd.object_phrase, "part": cmd.part,
                "holder": cmd.holder, "low_confidence": cmd.low_confidence}

    @app.post("/sessions/{session_id}/run")
    def run(session_id: str):
        sess = get_session(session_id)
        if not sess.frames:
            raise HTTPException(409, "session has no gaze frames")
        if not sess.utterance:
            raise HTTPException(409, "session has no command")
        scene = get_scene(sess.scene_id)

        def progress(stage, ok, detail):
            if ok is None:
                sess.push("stage", stage=stage, status="running", detail=None)
            else:
                sess.push("stage", stage=stage,
                          status="done" if ok else "failed", detail=detail)

        result = run_pipeline(scene, sess.frames, sess.utterance, sess.config,
                              progress=progress)
        sess.result = result
        if result.selection is not None:
            sess.push("selection", object_id=result.selection.object_id,
                      box=list(result.selection.box),
                      scores=[[c.object_id, float(s)]
                              for c, s in result.selection.scores])
        if result.grasp_plan is not None:
            best = result.grasp_plan.best
            sess.push("grasp",
                      position=[float(v) for v in best.pose.position],
                      approach=[float(v) for v in best.approach],
                      width=float(best.width),
                      contacts=[[float(v) for v in best.contact_a],
                                [float(v) for v in best.contact_b]])
        if result.motion is not None:
            from .arm import fk
            arm = sess.config.arm()
            times, positions = result.motion.combined()
            stride = max(len(times) // 200, 1)  # fixed cadence for animation
            for i in range(0, len(times), stride):
                ee = fk(arm, positions[i]).position
                sess.push("trajectory", t=float(times[i]),
                          q=[float(v) for v in positions[i]],
                          ee=[float(v) for v in ee])
        sess.push("run_complete", status=result.status,
                  failed_stage=result.failed_stage,
                  failure_reason=result.failure_reason)
        return {"status": result.status,
                "failed_stage": result.failed_stage,
                "failure_reason": result.failure_reason,
                "timings": {k: float(v) for k, v in result.timings.items()}}

    @app.get("/sessions/{session_id}")
    def get_record(session_id: str):
        sess = get_session(session_id)
        if sess.result is None:
            return {"id": sess.id, "scene_id": sess.scene_id,
                    "frames": len(sess.frames), "utterance": sess.utterance,
                    "status": "pending"}
        return session_to_dict(sess.result)

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        await ws.accept()
        if session_id not in st.sessions:
            await ws.close(code=4404)
            return
        sess = st.sessions[session_id]
        seq = 0
        try:
            while True:
                if seq < len(sess.events):
                    await ws.send_json(sess.events[seq])
                    seq += 1
                    if sess.events[seq - 1]["kind"] == "run_complete":
                        await ws.close()
                        return
                else:
                    await asyncio.sleep(0.02)
        except WebSocketDisconnect:
            return

    return app


def serve(host: str = "127.0.0.1", port: int = 8732):
    import uvicorn
    uvicorn.run(create_app(), host=host, port=port, log_level="warning")
