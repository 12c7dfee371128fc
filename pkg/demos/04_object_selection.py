"""Gaze + language fusion on the classic two-flashlight ambiguity.

Run: python demos/04_object_selection.py
"""
from handover_sim.fixtures import two_flashlight_scene
from handover_sim.gaze import simulate_gaze, heatmap_from_frames
from handover_sim.pipeline import PipelineConfig
from handover_sim.render import render
from handover_sim.selection import detect_candidates, score_candidates, select_object

cfg = PipelineConfig()
scene = two_flashlight_scene()
out = render(scene, cfg.camera())

# the user says only "flashlight" but stares at the red one
u0, v0, u1, v1 = out.boxes["red_flashlight-0"]
target = ((u0 + u1) / 2, (v0 + v1) / 2)
frames = simulate_gaze(target, cfg.monitor(), cfg.head(), noise_deg=0.4,
                       n=25, seed=3)
heatmap = heatmap_from_frames(frames, cfg.monitor(), cfg.head(),
                              sigma_px=cfg.sigma_px)
print(f"gaze smoothed to pixel ({heatmap.center[0]:.1f}, "
      f"{heatmap.center[1]:.1f})")

candidates = detect_candidates("flashlight", out, scene, cfg.detector, seed=0)
print(f"'flashlight' grounds to {len(candidates)} candidates")
for cand, score in score_candidates(heatmap, candidates):
    print(f"  {cand.object_id:<20} confidence {cand.confidence:.2f} "
          f"gaze mass {score:.4f}")
chosen, score = select_object(score_candidates(heatmap, candidates))
print(f"selected: {chosen.object_id} (gaze mass {score:.4f})")

# an explicit adjective overrides the ambiguity without gaze help
from handover_sim.selection import DetectorNoise
quiet = DetectorNoise(miss_rate=0.0, confidence_jitter=0.0,
                      false_positive_rate=0.0)
only_blue = detect_candidates("blue flashlight", out, scene, quiet, 0)
print(f"'blue flashlight' grounds to: "
      f"{[c.object_id for c in only_blue]}")
