"""Adaptive context-aware fusion of three enhanced variants.

A clip is enhanced three ways: the whole clip (FULL), a leading run of
``short_len`` frames (SHORT), and a leading run of ``intra_len`` frames by an
intra-frame specialised enhancer (INTRA). Output frame 0 comes from INTRA or
SHORT depending on a motion heuristic, the next ``head_len`` frames from SHORT,
and everything after from FULL.

The heuristic averages every ``m``-th input frame and thresholds the L1
gradient energy of that average. Static content averages to a sharp picture
(high energy); moving content blurs out (low energy).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import LengthMismatchError, PlanValidityError, ShapeMismatchError
from .frames import Frame, VideoSequence, convert_scale

DEFAULT_TAU = 2300.0


@dataclass(frozen=True)
class HeuristicConfig:
    """Average-frame motion heuristic settings.

    ``tau`` is in eight-bit sample units over the whole luma plane unless
    ``normalize_per_pixel`` is set, in which case the gradient energy is
    divided by ``W*H`` before comparison (and ``tau`` must be chosen to match).
    """

    tau: float = DEFAULT_TAU
    m_slow: int = 4
    m_fast: int = 8
    fps_cutoff: float = 30.0
    normalize_per_pixel: bool = False
    slow_motion_when_gradient_at_least_tau: bool = True

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.m_slow < 1 or self.m_fast < 1:
            raise ValueError("strides must be >= 1")


@dataclass(frozen=True)
class FusionConfig:
    short_len: int = 154
    intra_len: int = 122
    head_len: int = 63
    heuristic: HeuristicConfig = field(default_factory=HeuristicConfig)

    def __post_init__(self):
        if self.head_len < 0 or 1 + self.head_len > self.short_len:
            raise ValueError("need 1 + head_len <= short_len")
        if self.intra_len < 1:
            raise ValueError("intra_len must be >= 1")


class Source(enum.Enum):
    INTRA = "intra"
    SHORT = "short"
    FULL = "full"


@dataclass(frozen=True, eq=False)
class VariantSet:
    full: VideoSequence
    short: VideoSequence
    intra: VideoSequence

    def __post_init__(self):
        n = len(self.full)
        for name in ("short", "intra"):
            v = getattr(self, name)
            if v.geometry != self.full.geometry:
                raise ShapeMismatchError(f"{name} variant geometry {v.geometry} != {self.full.geometry}")
            if len(v) > n:
                raise LengthMismatchError(f"{name} variant has {len(v)} frames, full has {n}")

    def get(self, source: Source) -> VideoSequence:
        return getattr(self, source.value)


@dataclass(frozen=True)
class FusionPlan:
    sources: tuple

    def __len__(self):
        return len(self.sources)

    def runs(self) -> list:
        """Run-length summary: ``[(source, start, stop), ...]``."""
        out = []
        for i, s in enumerate(self.sources):
            if out and out[-1][0] is s:
                out[-1] = (s, out[-1][1], i + 1)
            else:
                out.append((s, i, i + 1))
        return out

    def summary(self) -> list:
        return [{"source": s.value, "start": a, "stop": b} for s, a, b in self.runs()]


@dataclass(frozen=True)
class HeuristicDecision:
    slow_motion: bool
    gradient: float
    stride: int
    tau: float
    sampled_frames: int
    normalized: bool
    polarity: str

    def as_dict(self) -> dict:
        return {
            "slow_motion": self.slow_motion,
            "gradient_energy": self.gradient,
            "stride_m": self.stride,
            "tau": self.tau,
            "sampled_frames": self.sampled_frames,
            "normalize_per_pixel": self.normalized,
            "polarity": self.polarity,
        }


def sampled_indices(n: int, m: int) -> list:
    return list(range(0, n, m))


def average_frame(seq: VideoSequence, m: int) -> Frame:
    """Mean of frames ``0, m, 2m, ...`` below ``len(seq)``."""
    if m < 1:
        raise ValueError("stride must be >= 1")
    idx = sampled_indices(len(seq), m)
    base = seq.frames[0]
    # accumulate offsets from the first sample so constant input is reproduced exactly
    planes = []
    for k, p0 in enumerate(base.planes):
        acc = np.zeros_like(p0)
        for i in idx[1:]:
            acc += seq.frames[i].planes[k] - p0
        planes.append(p0 + acc / len(idx))
    return Frame(tuple(planes), base.layout, base.scale)


def select_stride(fps, h: HeuristicConfig = HeuristicConfig()) -> int:
    fps = Fraction(fps)
    if fps <= 0:
        raise ValueError("fps must be positive")
    return h.m_slow if fps <= Fraction(h.fps_cutoff) else h.m_fast


def gradient_energy(frame: Frame, normalize_per_pixel: bool = False) -> float:
    """Sum of absolute forward differences of luma along x plus along y."""
    y = frame.luma
    g = float(np.sum(np.abs(np.diff(y, axis=1)))) + float(np.sum(np.abs(np.diff(y, axis=0))))
    if normalize_per_pixel:
        g /= y.size
    return g


def classify_gradient(g: float, h: HeuristicConfig) -> bool:
    above = g >= h.tau
    return above if h.slow_motion_when_gradient_at_least_tau else not above


def detect_slow_motion(seq: VideoSequence, h: HeuristicConfig = HeuristicConfig()) -> HeuristicDecision:
    """Decide whether ``seq`` is static / slow-moving content.

    The average frame is measured in eight-bit units whatever the sequence
    scale, so ``tau`` keeps one meaning.
    """
    m = select_stride(seq.fps, h)
    avg = convert_scale(average_frame(seq, m), "eight_bit")
    g = gradient_energy(avg, h.normalize_per_pixel)
    return HeuristicDecision(
        slow_motion=classify_gradient(g, h),
        gradient=g,
        stride=m,
        tau=h.tau,
        sampled_frames=len(sampled_indices(len(seq), m)),
        normalized=h.normalize_per_pixel,
        polarity="gradient>=tau" if h.slow_motion_when_gradient_at_least_tau else "gradient<tau",
    )


def build_plan(n_frames: int, slow_motion: bool, cfg: FusionConfig = FusionConfig()) -> FusionPlan:
    if n_frames < 1:
        raise ValueError("need at least one frame")
    head = min(cfg.head_len, n_frames - 1)
    first = Source.SHORT if slow_motion else Source.INTRA
    sources = [first] + [Source.SHORT] * head + [Source.FULL] * (n_frames - 1 - head)
    return FusionPlan(tuple(sources))


def validate_plan(variants: VariantSet, plan: FusionPlan) -> None:
    n = len(variants.full)
    if len(plan) != n:
        raise PlanValidityError(f"plan covers {len(plan)} frames, full variant has {n}")
    for i, s in enumerate(plan.sources):
        if i >= len(variants.get(s)):
            raise PlanValidityError(
                f"frame {i} assigned to {s.value}, which has only {len(variants.get(s))} frames"
            )


def apply_plan(variants: VariantSet, plan: FusionPlan) -> VideoSequence:
    """Assemble the output by copying frame ``i`` from its assigned variant."""
    validate_plan(variants, plan)
    frames = [variants.get(s).frames[i] for i, s in enumerate(plan.sources)]
    return variants.full.with_frames(frames)


def fuse(seq: VideoSequence, variants: VariantSet, cfg: FusionConfig = FusionConfig()):
    """Run the heuristic on the input ``seq`` and fuse ``variants``.

    Returns ``(fused, decision, plan)``.
    """
    decision = detect_slow_motion(seq, cfg.heuristic)
    plan = build_plan(len(variants.full), decision.slow_motion, cfg)
    return apply_plan(variants, plan), decision, plan
