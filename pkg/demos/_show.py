"""Tiny terminal renderer shared by the demo scripts."""

import numpy as np

RAMP = " .:-=+*#%@"


def ascii_image(image, step=1):
    img = np.asarray(image, dtype=float)[::step, ::step]
    ok = np.isfinite(img)
    lo, hi = img[ok].min(), img[ok].max()
    scaled = np.zeros(img.shape, dtype=int)
    if hi > lo:
        scaled[ok] = np.rint((img[ok] - lo) / (hi - lo) * (len(RAMP) - 1)).astype(int)
    return "\n".join("".join(RAMP[v] * 2 for v in row) for row in scaled)
