#!/usr/bin/env python3
"""Walkthrough: the 256-canvas crop regimes used around network training.

Training consumes five crops per image (four corners plus center); testing
takes the single center crop at the architecture's input size.
"""

import numpy as np

from earmetrics.augment import ImageBuffer
from earmetrics.synthetic import draw_ear_silhouette
from earmetrics.tinycnn import center_crop, five_crop, five_crop_offsets

rng = np.random.default_rng(5)
canvas = ImageBuffer((draw_ear_silhouette(rng, 15.0, side=256) * 255).astype(np.uint8))
print(f"canvas: {canvas.width}x{canvas.height}")

for size in (224, 227):
    offsets = five_crop_offsets(canvas.height, canvas.width, size)
    crops = five_crop(canvas, size)
    print(f"\ncrop size {size}: offsets (row, col) = {offsets}")
    for label, crop, offset in zip(("tl", "tr", "bl", "br", "center"), crops, offsets):
        assert crop.data.shape == (size, size, 1)
        print(f"  {label:>6s} at {offset}: mean intensity {crop.data.mean():6.1f}")
    assert np.array_equal(crops[4].data, center_crop(canvas, size).data)
    print(f"  center_crop({size}) equals the fifth five-crop element bit-for-bit")

print("\ncenter_crop at the full canvas size is the identity:",
      np.array_equal(center_crop(canvas, 256).data, canvas.data))
