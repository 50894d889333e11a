"""Eight-way dihedral test-time augmentation around a toy enhancer.

An enhancer that only touches pixel (0, 0) is wrapped in TTA. Each of the
eight transforms moves a different corner to (0, 0), so after undoing the
transforms and averaging, every corner carries a quarter of the bump.
"""

import numpy as np

from ldvfuse import DIHEDRAL_ELEMENTS, FrameMapEnhancer, VideoSequence, tta_enhance


def bump_corner(frame, index, run_length):
    y = frame.luma.copy()
    y[0, 0] += 1.0
    return frame.with_planes([y])


seq = VideoSequence.from_luma(np.zeros((1, 4, 6)))
print("elements:", ", ".join(t.name for t in DIHEDRAL_ELEMENTS))
out = tta_enhance(seq, FrameMapEnhancer(bump_corner, "bump"))
print(out[0].luma)
