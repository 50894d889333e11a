"""Pluggable enhancers, variant generation and trimmed-input analysis."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.ndimage import uniform_filter

from .codec import run_pipe
from .errors import LengthMismatchError, ProtocolError, WindowError
from .frames import Frame, VideoSequence
from .fusion import FusionConfig, VariantSet
from .metrics import MetricsReport, PSNR_CAP, cap_psnr, psnr_frame


class Enhancer:
    """Base class: subclasses implement :meth:`enhance`.

    Call the instance rather than ``enhance`` directly; ``__call__`` enforces
    that frame count and geometry survive the enhancement.
    """

    name = "enhancer"
    deterministic = True

    def enhance(self, seq: VideoSequence) -> VideoSequence:
        raise NotImplementedError

    def __call__(self, seq: VideoSequence) -> VideoSequence:
        return run_enhancer(self, seq)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def run_enhancer(enhancer: Enhancer, seq: VideoSequence) -> VideoSequence:
    out = enhancer.enhance(seq)
    if len(out) != len(seq):
        raise ProtocolError(f"{enhancer.name} returned {len(out)} frames for {len(seq)}")
    if out.geometry != seq.geometry:
        raise ProtocolError(
            f"{enhancer.name} changed frame geometry {seq.geometry} -> {out.geometry}"
        )
    return out


class IdentityEnhancer(Enhancer):
    name = "identity"

    def enhance(self, seq):
        return seq


class FrameMapEnhancer(Enhancer):
    """Applies ``fn(frame, index, run_length)`` to each frame independently."""

    def __init__(self, fn: Callable[[Frame, int, int], Frame], name: str = "frame-map"):
        self.fn = fn
        self.name = name

    def enhance(self, seq):
        n = len(seq)
        return seq.with_frames(self.fn(f, i, n) for i, f in enumerate(seq.frames))


def smooth_frame(frame: Frame, radius: int, strength: float) -> Frame:
    """Blend each plane with its ``(2r+1)``-box average (edge-replicated)."""
    if strength == 0 or radius == 0:
        return frame
    size = 2 * radius + 1
    return frame.with_planes(
        (1.0 - strength) * p + strength * uniform_filter(p, size=size, mode="nearest")
        for p in frame.planes
    )


class SmoothEnhancer(Enhancer):
    """Stand-in enhancer: box smoothing blended with the input.

    Block quantization artifacts are mostly high-frequency, so moderate
    smoothing raises PSNR on degraded content.
    """

    def __init__(self, radius: int = 1, strength: float = 0.5):
        if radius < 0:
            raise ValueError("radius must be >= 0")
        if not 0.0 <= strength <= 1.0:
            raise ValueError("strength must lie in [0, 1]")
        self.radius = int(radius)
        self.strength = float(strength)
        self.name = f"smooth(r={self.radius},s={self.strength:g})"

    def enhance(self, seq):
        return seq.map_frames(lambda f: smooth_frame(f, self.radius, self.strength))


class ExternalEnhancer(Enhancer):
    """Runs a child process that reads Y4M on stdin and writes Y4M on stdout."""

    deterministic = False

    def __init__(self, command: str, name: str | None = None, timeout: float | None = None):
        self.command = command
        self.timeout = timeout
        self.name = name or f"external({command})"

    def enhance(self, seq):
        return run_pipe(seq, self.command, self.name, self.timeout)


def enhancer_identity() -> Enhancer:
    return IdentityEnhancer()


def enhancer_smooth(radius: int = 1, strength: float = 0.5) -> Enhancer:
    return SmoothEnhancer(radius, strength)


def enhancer_external(command: str, timeout: float | None = None) -> Enhancer:
    return ExternalEnhancer(command, timeout=timeout)


def run_variants(seq: VideoSequence, enhancer_main: Enhancer, enhancer_intra: Enhancer,
                 cfg: FusionConfig = FusionConfig(), threads: int = 1) -> VariantSet:
    """Produce the FULL, SHORT and INTRA variants of ``seq``."""
    jobs = [
        (enhancer_main, seq),
        (enhancer_main, seq[: cfg.short_len]),
        (enhancer_intra, seq[: cfg.intra_len]),
    ]
    if threads > 1:
        with ThreadPoolExecutor(min(threads, 3)) as pool:
            full, short, intra = pool.map(lambda job: job[0](job[1]), jobs)
    else:
        full, short, intra = (e(s) for e, s in jobs)
    return VariantSet(full, short, intra)


@dataclass(frozen=True)
class TrimAnalysisConfig:
    gaps: tuple = (90, 122, 154, 186)
    start_shifts: tuple = (0, 32)

    def __post_init__(self):
        if not self.gaps or any(g < 1 for g in self.gaps):
            raise ValueError("gaps must be >= 1")
        if any(s < 0 for s in self.start_shifts):
            raise ValueError("start shifts must be >= 0")


def _psnr_list(x: VideoSequence, gt_frames) -> list:
    return [cap_psnr(psnr_frame(a, b)) for a, b in zip(x.frames, gt_frames)]


def trim_analysis(seq: VideoSequence, gt: VideoSequence, enhancer: Enhancer,
                  cfg: TrimAnalysisConfig = TrimAnalysisConfig(), threads: int = 1) -> MetricsReport:
    """Per-frame PSNR change from enhancing trimmed windows instead of the whole clip.

    For every ``(shift, gap)`` the enhancer sees ``seq[shift:shift+gap]``
    (clipped to the clip end); its per-frame PSNR against ``gt`` minus the
    whole-clip PSNR at the same absolute frames becomes the series
    ``delta_psnr_shift{shift}_gap{gap}``. Frames outside a window are NaN.
    """
    n = len(seq)
    if len(gt) != n:
        raise LengthMismatchError(f"input has {n} frames, ground truth {len(gt)}")
    for shift in cfg.start_shifts:
        if shift + 1 > n:
            raise WindowError(f"start shift {shift} lies beyond the {n}-frame clip")

    windows = [(s, g, min(s + g, n)) for s in cfg.start_shifts for g in cfg.gaps]
    runs = [(enhancer, seq)] + [(enhancer, seq[s:stop]) for s, _, stop in windows]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            outs = list(pool.map(lambda job: job[0](job[1]), runs))
    else:
        outs = [e(s) for e, s in runs]

    base = _psnr_list(outs[0], gt.frames)
    report = MetricsReport(
        series={"psnr_full": base},
        aggregates={"psnr_full_mean": sum(base) / n},
        metadata={"video": seq.name, "frame_count": n, "sample_scale": seq.scale,
                  "psnr_cap": PSNR_CAP, "enhancer": enhancer.name, "windows": {}},
    )
    for (shift, gap, stop), out in zip(windows, outs[1:]):
        trimmed = _psnr_list(out, gt.frames[shift:stop])
        delta = [math.nan] * n
        for k, v in enumerate(trimmed):
            delta[shift + k] = v - base[shift + k]
        name = f"delta_psnr_shift{shift}_gap{gap}"
        report.series[name] = delta
        report.aggregates[f"{name}_mean"] = float(np.mean(delta[shift:stop]))
        report.metadata["windows"][name] = {
            "start": shift, "stop": stop, "length": stop - shift,
            "truncated": stop - shift < gap,
        }
    return report
