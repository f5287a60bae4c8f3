"""Follow one synthetic lateral knee radiograph through every stage.

Run from the repository root:  python3 demos/01_walk_through_one_radiograph.py
Outputs land in demo-out/.
"""
from pathlib import Path

import numpy as np

from autocor import fileio, imaging, landmarks, phantom, pipeline, render, segmentation
from autocor.measurement import measure

out = Path("demo-out")
out.mkdir(exist_ok=True)

# A phantom with known geometry: femoral diameter 104 px, PCOR 1.05, ACOR 0.18,
# a slightly tilted shaft and the usual film-grain noise.
spec = phantom.PhantomSpec(fd_px=104, pcor=1.05, acor=0.18, shaft_tilt_deg=1.5, noise_sigma=8, seed=2)
image, truth = phantom.generate(spec)
print(f"image {image.shape[1]}x{image.shape[0]}, truth PCOR {truth.pcor:.3f} ACOR {truth.acor:.3f}")
fileio.write_png(out / "01_input.png", image)

cfg = pipeline.PipelineConfig()

# 1. crop the condyle window, smooth with the bilateral filter, keep what Otsu calls bright
thresholded, t = pipeline.preprocess(image, cfg)
print(f"Otsu threshold inside the condyle window: {t}")
fileio.write_png(out / "02_thresholded.png", thresholded)

# 2. four-colour k-means; the brightest cluster is the implant
rgb = imaging.gray_to_rgb(thresholded).reshape(-1, 3)
model = segmentation.kmeans_rgb(rgb, cfg.k, cfg.eps, cfg.max_iter, cfg.seed)
print("cluster centres (gray):", np.round(model.centers[:, 0], 1))
print("inertia per iteration:", [round(v) for v in model.inertia_history])
idx = segmentation.brightest_cluster(model)
mask = segmentation.cluster_mask(model, idx, thresholded.shape)
contour = segmentation.largest_contour(segmentation.external_contours(mask))
print(f"implant contour: {len(contour)} points, area {segmentation.contour_area(contour):.0f} px^2")

# 3. leftmost and rightmost contour points, then two cortex rows in the shaft patch above them
lm, patch_rect = pipeline.locate(image, contour, cfg)
print("edge points (full image):", lm.edge_left, lm.edge_right)
print("shaft patch:", patch_rect)

# 4. distances and ratios
m = measure(lm)
print(f"recovered  PCOR {m.pcor:.3f}  ACOR {m.acor:.3f}  fd {m.fd_px:.1f} px  "
      f"posterior side {m.posterior_side.value}, limb {m.limb.value}")
print(f"truth      PCOR {truth.pcor:.3f}  ACOR {truth.acor:.3f}  fd {truth.fd_px:.1f} px")

fileio.write_png(out / "03_overlay.png", render.draw_overlay(image, lm, m))
print(f"overlay written to {out / '03_overlay.png'}")

# The one-call version does the same thing and tags failures with their stage.
assert pipeline.run(image, cfg).measurement == m
