"""Motion heuristic and three-variant fusion on a static and a panning clip."""

from ldvfuse import FusionConfig, SmoothEnhancer, detect_slow_motion, fuse, run_variants
from ldvfuse.synthetic import panning_clip, static_clip

cfg = FusionConfig()
for clip in (static_clip(n_frames=64), panning_clip(n_frames=100, smoothness=0)):
    d = detect_slow_motion(clip, cfg.heuristic)
    print(f"{clip.name}: G={d.gradient:.1f} stride={d.stride} slow_motion={d.slow_motion}")

clip = panning_clip(n_frames=200)
variants = run_variants(clip, SmoothEnhancer(1, 0.5), SmoothEnhancer(1, 0.1), cfg)
fused, decision, plan = fuse(clip, variants, cfg)
for source, start, stop in plan.runs():
    print(f"frames {start:3d}..{stop - 1:3d} <- {source.value}")
