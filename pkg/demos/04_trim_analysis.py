"""How much does an enhancer's output change when it sees a trimmed window?

A per-frame enhancer is blind to trimming, so the demo uses a small temporal
one: each frame is blended with its predecessor. The first frame of a trimmed
window has no predecessor, which shows up as a nonzero delta at the cut.
"""

import numpy as np

from ldvfuse import DegradationProfile, GopConfig, simulate_low_delay, trim_analysis
from ldvfuse.enhance import Enhancer
from ldvfuse.synthetic import panning_clip


class TemporalBlend(Enhancer):
    name = "temporal-blend"

    def enhance(self, seq):
        frames = list(seq.frames)
        out = [frames[0]] + [
            cur.with_planes(0.7 * c + 0.3 * p for c, p in zip(cur.planes, prev.planes))
            for prev, cur in zip(frames, frames[1:])
        ]
        return seq.with_frames(out)


gt = panning_clip(height=32, width=48, n_frames=200)
deg = simulate_low_delay(gt, GopConfig(), DegradationProfile.uniform(2, 16))
report = trim_analysis(deg, gt, TemporalBlend())
for name, series in report.series.items():
    if name.startswith("delta"):
        win = report.metadata["windows"][name]
        first = series[win["start"]]
        print(f"{name:28s} frames {win['start']:3d}..{win['stop'] - 1:3d}"
              f"  first {first:+.3f} dB  mean {np.nanmean(series):+.4f} dB")
