"""Simulated low-delay coding: a clean intra frame followed by coarser inter frames."""

from ldvfuse import DegradationProfile, GopConfig, classify_frame, psnr_sequence, simulate_low_delay
from ldvfuse.synthetic import panning_clip

gop = GopConfig()
for k in range(9):
    fk = classify_frame(k, gop)
    print(f"frame {k}: {fk.kind.value:5s} offset={fk.gop_offset} level={fk.level}")

clean = panning_clip(n_frames=24)
for intra, inter in ((2, 8), (2, 16), (4, 24)):
    degraded = simulate_low_delay(clean, gop, DegradationProfile.uniform(intra, inter))
    psnr = psnr_sequence(degraded, clean).series["psnr"]
    print(f"steps {intra}/{inter}: frame 0 {psnr[0]:.2f} dB, inter mean {sum(psnr[1:]) / 23:.2f} dB")
