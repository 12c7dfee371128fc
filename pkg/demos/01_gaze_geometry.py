"""Walk through the gaze chain: blend, intersect, smooth, rasterize.

Run: python demos/01_gaze_geometry.py
"""
import numpy as np

from handover_sim.gaze import (build_heatmap, default_head, default_monitor,
                               ema_stream, ensemble_direction, focal_pixels,
                               intersect_monitor, simulate_gaze)

monitor = default_monitor()
head = default_head(monitor)
print(f"monitor: {monitor.width_px}x{monitor.height_px} px, "
      f"head at {head.position.round(3)} m")

# blend head and eye directions
head_dir = np.array([0.05, -0.02, -1.0])
head_dir /= np.linalg.norm(head_dir)
eye_dir = np.array([-0.03, 0.04, -1.0])
eye_dir /= np.linalg.norm(eye_dir)
blend = ensemble_direction(head_dir, eye_dir, alpha=0.3)
print("blended direction:", blend.round(4))

lam, mu, sigma = intersect_monitor(monitor, head, blend)
print(f"ray meets the display at pixel ({lam:.1f}, {mu:.1f}), "
      f"travel distance {sigma:.3f} m")

# a noisy stream smoothed back onto the target
target = (420.0, 180.0)
frames = simulate_gaze(target, monitor, head, noise_deg=1.0, n=30, seed=4)
pixels = focal_pixels(frames, monitor, head, alpha=0.3)
print(f"raw per-frame pixel spread: x std {pixels[:,0].std():.1f} px")
smoothed = ema_stream(pixels, beta=0.3)
print(f"target {target} -> smoothed estimate "
      f"({smoothed[0]:.1f}, {smoothed[1]:.1f})")

heatmap = build_heatmap(smoothed, monitor.width_px, monitor.height_px)
print(f"heatmap sums to {heatmap.grid.sum():.9f}, "
      f"argmax at {heatmap.argmax_pixel()}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.imshow(heatmap.grid, cmap="inferno")
    plt.scatter([target[0]], [target[1]], marker="+", c="cyan", label="target")
    plt.legend()
    plt.title("focal-probability heatmap")
    plt.savefig("demos/out_gaze_heatmap.png", dpi=80)
    print("wrote demos/out_gaze_heatmap.png")
except ImportError:
    print("(matplotlib not installed; skipping the figure)")
