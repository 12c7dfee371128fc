"""Generate a random tabletop, render it, and inspect the outputs.

Run: python demos/03_scene_and_render.py
"""
import numpy as np

from handover_sim.render import default_camera, render, save_depth
from handover_sim.scene import generate_scene

scene = generate_scene(seed=7, object_count=9)
print(f"scene {scene.id}: {len(scene.objects)} objects")
for obj in scene.objects:
    x, y, _ = obj.pose.position
    print(f"  {obj.id:<16} {obj.mass_class:<7} at ({x:+.2f}, {y:+.2f}) m, "
          f"parts: {[p.name for p in obj.parts] or '-'}")

camera = default_camera()
out = render(scene, camera)
visible = out.depth > 0
print(f"\nrender {out.width}x{out.height}: {visible.sum()} object pixels, "
      f"depth range [{out.depth[visible].min():.3f}, "
      f"{out.depth[visible].max():.3f}] m")
for oid, box in sorted(out.boxes.items()):
    print(f"  {oid:<16} box {box}")

save_depth(out.depth, "demos/out_depth.bin")
print("wrote demos/out_depth.bin (16-byte header + float32 grid)")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    axes[0].imshow(out.labels, cmap="tab20", interpolation="nearest")
    axes[0].set_title("object labels")
    depth_vis = np.where(out.depth > 0, out.depth, np.nan)
    axes[1].imshow(depth_vis, cmap="viridis")
    axes[1].set_title("depth (m)")
    fig.savefig("demos/out_render.png", dpi=80)
    print("wrote demos/out_render.png")
except ImportError:
    print("(matplotlib not installed; skipping the figure)")
