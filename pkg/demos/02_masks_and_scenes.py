"""Degradation simulators and the synthetic scene generator.

Writes PGM previews of each mask kind and one scene band to demos/out/.

Run:  python3 demos/02_masks_and_scenes.py
"""

from pathlib import Path

import numpy as np

from stsfill.fileio import export_image
from stsfill.masks import (
    apply_mask,
    combine_masks,
    coverage,
    gen_cloud_mask,
    gen_slcoff_mask,
    gen_stripe_mask,
)
from stsfill.scenes import synth_scene

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

H = W = 256
masks = {
    "stripes": gen_stripe_mask(H, W, period=4, stripe_width=1),
    "slc_off": gen_slcoff_mask(H, W, max_gap=10, period=33, angle_deg=8.0),
    "cloud": gen_cloud_mask(H, W, target_coverage=0.2, smoothness=6.0, seed=3),
}
masks["cloud_plus_slc"] = combine_masks(masks["slc_off"], masks["cloud"])

for name, m in masks.items():
    export_image(m[None, None].astype(float), 0, out / f"mask_{name}.pgm")
    print(f"{name:15s} missing fraction {coverage(m):.3f}  -> out/mask_{name}.pgm")

# --- a correlated (truth, auxiliary) scene pair ------------------------------
scene = synth_scene(2, H, W, seed=7, relation="nonlinear")
corrupted = apply_mask(scene.x, masks["slc_off"])
export_image(scene.x, 0, out / "scene_truth.pgm")
export_image(scene.y2, 0, out / "scene_auxiliary.pgm")
export_image(corrupted, 0, out / "scene_corrupted.pgm")
a, c = scene.coeffs[0]
print(f"\nband 0 affine part: x ~ {a:.3f} * y2 + {c:+.3f} (plus nonlinear terms)")
print("wrote scene_truth.pgm / scene_auxiliary.pgm / scene_corrupted.pgm")
