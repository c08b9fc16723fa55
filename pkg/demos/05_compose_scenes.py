"""
Composing occluded scenes
=========================

Synthetic people are stacked on a canvas one at a time. Each keeps its 14
keypoints; a keypoint counts as visible when no later (higher) silhouette
covers it and it is inside the canvas.
"""

# %%
from pathlib import Path

import numpy as np

from advteacher.compositor import (KEYPOINT_NAMES, CompositionConfig, compose_scene_with_stats,
                                   empty_background, make_template_library, render_layers,
                                   write_pgm)

library = make_template_library()
cfg = CompositionConfig(lam=9, max_overlap_iou=0.6, pitch_range=(0, 45))
scene, stats = compose_scene_with_stats(empty_background(), library, cfg, np.random.default_rng(3))
print(stats)
print(f"pitch {scene.camera_pitch_deg:.1f} deg, {len(scene.persons)} people")
for i, p in enumerate(scene.persons):
    hidden = [KEYPOINT_NAMES[k] for k in np.flatnonzero(~p.visible)]
    print(f"z={p.z_order}  visible {scene.occlusion_ratios[i]:.2f}  hidden: {', '.join(hidden) or '-'}")

# %%
# A label image for a quick look: each pixel holds the topmost person.
out = Path("demo_output")
out.mkdir(exist_ok=True)
write_pgm(out / "scene_layers.pgm", render_layers(scene))
print("wrote", out / "scene_layers.pgm")

# %%
# Tighter overlap limits cost more placement attempts.
for limit in (1.0, 0.3, 0.05):
    c = CompositionConfig(lam=12, max_overlap_iou=limit)
    tot = [compose_scene_with_stats(empty_background(), library, c, np.random.default_rng(s))[1] for s in range(10)]
    print(f"max IoU {limit:4.2f}: rejections {sum(t.rejections for t in tot):4d}  dropped {sum(t.dropped for t in tot)}")
