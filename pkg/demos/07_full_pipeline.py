"""End-to-end run: look at the mug, ask to keep the handle, watch the stages.

Run: python demos/07_full_pipeline.py
"""
import numpy as np

from handover_sim.fixtures import mug_handle_scene
from handover_sim.gaze import simulate_gaze
from handover_sim.pipeline import PipelineConfig, replay, run_pipeline, save_session
from handover_sim.render import render

cfg = PipelineConfig(seed=3)
scene = mug_handle_scene()
out = render(scene, cfg.camera())
u0, v0, u1, v1 = out.boxes["mug-0"]
frames = simulate_gaze(((u0 + u1) / 2, (v0 + v1) / 2), cfg.monitor(),
                       cfg.head(), noise_deg=0.25, n=20, seed=11)

session = run_pipeline(scene, frames,
                       "Hand me the mug and I want to hold the handle", cfg,
                       progress=lambda stage, ok, _:
                       print(f"  stage {stage:<10} {'ok' if ok else 'FAILED'}"))
print(f"status: {session.status}")
print(f"parsed: ({session.command.object_phrase}, {session.command.part}, "
      f"{session.command.holder})")
print(f"selected: {session.selection.object_id}")
best = session.grasp_plan.best
mug = scene.object_by_id("mug-0")
handle = mug.part_by_name("handle")
on_handle = mug.part_membership(
    handle, np.vstack([best.contact_a, best.contact_b])).any()
print(f"grasp width {best.width * 100:.1f} cm, contacts on handle: {on_handle}")
print("timings:", {k: f"{v * 1000:.0f}ms" for k, v in session.timings.items()})

save_session(session, "demos/out_session.json")
result = replay("demos/out_session.json")
print(f"replayed byte-identical: {result.byte_identical}")
