"""Quality metrics and restoration losses.

PSNR per frame and per sequence, Delta-PSNR between runs, and the three loss
terms used for fine-tuning: Charbonnier, anisotropic total variation and the
temporal-gradient loss (Charbonnier distance between consecutive-frame
difference sequences).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientFramesError, LengthMismatchError, ShapeMismatchError
from .frames import Frame, VideoSequence

IDENTICAL = math.inf
PSNR_CAP = 100.0


@dataclass
class MetricsReport:
    """Named per-frame series, scalar aggregates and free-form metadata.

    Series values outside a measured window are NaN so every series can share
    the frame axis.
    """

    series: dict = field(default_factory=dict)
    aggregates: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def merge(self, other: "MetricsReport") -> "MetricsReport":
        self.series.update(other.series)
        self.aggregates.update(other.aggregates)
        for k, v in other.metadata.items():
            self.metadata.setdefault(k, v)
        return self


@dataclass(frozen=True)
class LossWeights:
    w_char: float = 1.0
    w_tg: float = 1e-3
    w_tv: float = 1e-4
    epsilon: float = 1e-3

    def __post_init__(self):
        if min(self.w_char, self.w_tg, self.w_tv) < 0:
            raise ValueError("loss weights must be non-negative")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class LossBreakdown:
    total: float
    charbonnier: float
    temporal_gradient: float
    total_variation: float


def _check_frames(a: Frame, b: Frame) -> None:
    if a.geometry != b.geometry:
        raise ShapeMismatchError(f"frame geometry {a.geometry} != {b.geometry}")


def _check_seqs(x: VideoSequence, ref: VideoSequence) -> None:
    if len(x) != len(ref):
        raise LengthMismatchError(f"{len(x)} frames vs {len(ref)} reference frames")
    if x.geometry != ref.geometry:
        raise ShapeMismatchError(f"sequence geometry {x.geometry} != {ref.geometry}")


def psnr_frame(a: Frame, b: Frame, max_value: float | None = None,
               all_planes: bool = False, pooling: str = "mse") -> float:
    """PSNR in dB; :data:`IDENTICAL` (``inf``) when the frames match exactly.

    Luma only by default. With ``all_planes`` the squared error is pooled over
    every sample of every plane (``pooling="mse"``), or per-plane PSNRs are
    averaged (``pooling="average"``, identical planes counted at the cap).
    """
    _check_frames(a, b)
    if pooling not in ("mse", "average"):
        raise ValueError(f"unknown PSNR pooling {pooling!r}")
    peak = a.scale_max if max_value is None else max_value
    k = len(a.planes) if all_planes else 1
    sse, counts = [], []
    for pa, pb in zip(a.planes[:k], b.planes[:k]):
        d = pa - pb
        sse.append(float(np.sum(d * d)))
        counts.append(d.size)
    if sum(sse) == 0:
        return IDENTICAL
    if pooling == "mse":
        return 10.0 * math.log10(peak * peak * sum(counts) / sum(sse))
    per_plane = [PSNR_CAP if e == 0 else 10.0 * math.log10(peak * peak * n / e)
                 for e, n in zip(sse, counts)]
    return sum(per_plane) / len(per_plane)


def cap_psnr(value: float, cap: float = PSNR_CAP) -> float:
    return min(value, cap)


def psnr_sequence(x: VideoSequence, ref: VideoSequence, cap: float = PSNR_CAP,
                  all_planes: bool = False, series_name: str = "psnr",
                  pooling: str = "mse") -> MetricsReport:
    _check_seqs(x, ref)
    raw = [psnr_frame(a, b, all_planes=all_planes, pooling=pooling)
           for a, b in zip(x.frames, ref.frames)]
    values = [cap_psnr(v, cap) for v in raw]
    return MetricsReport(
        series={series_name: values},
        aggregates={f"{series_name}_mean": sum(values) / len(values)},
        metadata={
            "video": x.name,
            "frame_count": len(x),
            "sample_scale": x.scale,
            "psnr_cap": cap,
            "identical_frames": sum(v == IDENTICAL for v in raw),
            "psnr_planes": "all" if all_planes else "luma",
            "psnr_pooling": pooling if all_planes else "none",
        },
    )


def delta_series(a, b) -> list:
    """Element-wise ``a - b``; NaN propagates."""
    if len(a) != len(b):
        raise LengthMismatchError(f"series lengths {len(a)} and {len(b)} differ")
    return [float(u) - float(v) for u, v in zip(a, b)]


def _charbonnier_planes(xs, refs, epsilon: float) -> float:
    # sqrt(d^2 + e^2) - e == d^2 / (sqrt(d^2 + e^2) + e): exact zero for d == 0
    eps2 = epsilon * epsilon
    excess = 0.0
    count = 0
    for px, pr in zip(xs, refs):
        d2 = np.square(px - pr)
        excess += float(np.sum(d2 / (np.sqrt(d2 + eps2) + epsilon)))
        count += d2.size
    return epsilon + excess / count


def _planes(seq: VideoSequence):
    return [p for f in seq.frames for p in f.planes]


def charbonnier(x: VideoSequence, ref: VideoSequence, epsilon: float = 1e-3) -> float:
    """Mean over every sample of ``sqrt((x - ref)**2 + eps**2)``."""
    _check_seqs(x, ref)
    return _charbonnier_planes(_planes(x), _planes(ref), epsilon)


def frame_tv(plane: np.ndarray) -> float:
    h, w = plane.shape
    gx = float(np.sum(np.abs(np.diff(plane, axis=1))))
    gy = float(np.sum(np.abs(np.diff(plane, axis=0))))
    return (gx + gy) / (h * w)


def tv_loss(x: VideoSequence) -> float:
    """Anisotropic TV of the luma plane per pixel, averaged over frames."""
    return sum(frame_tv(f.luma) for f in x.frames) / len(x)


def temporal_gradients(seq: VideoSequence) -> list:
    fr = seq.frames
    return [b - a for t in range(len(fr) - 1) for a, b in zip(fr[t].planes, fr[t + 1].planes)]


def tg_loss(x: VideoSequence, ref: VideoSequence, epsilon: float = 1e-3) -> float:
    """Charbonnier distance between ``x[t+1] - x[t]`` and ``ref[t+1] - ref[t]``."""
    _check_seqs(x, ref)
    if len(x) < 2:
        raise InsufficientFramesError("temporal gradient loss needs at least two frames")
    return _charbonnier_planes(temporal_gradients(x), temporal_gradients(ref), epsilon)


def combine_losses(l_char: float, l_tg: float, l_tv: float,
                   w: LossWeights = LossWeights()) -> LossBreakdown:
    total = w.w_char * l_char + w.w_tg * l_tg + w.w_tv * l_tv
    return LossBreakdown(total, l_char, l_tg, l_tv)


def combined_loss(x: VideoSequence, ref: VideoSequence,
                  w: LossWeights = LossWeights()) -> LossBreakdown:
    """Weighted Charbonnier + temporal-gradient + TV; breakdown terms are unweighted.

    A single-frame sequence has no temporal gradient; that is only an error
    when ``w.w_tg`` is non-zero.
    """
    l_char = charbonnier(x, ref, w.epsilon)
    if len(x) < 2 and w.w_tg == 0:
        l_tg = 0.0
    else:
        l_tg = tg_loss(x, ref, w.epsilon)
    return combine_losses(l_char, l_tg, tv_loss(x), w)


def loss_report(x: VideoSequence, ref: VideoSequence, w: LossWeights = LossWeights()) -> MetricsReport:
    b = combined_loss(x, ref, w)
    return MetricsReport(
        aggregates={
            "loss_total": b.total,
            "loss_charbonnier": b.charbonnier,
            "loss_temporal_gradient": b.temporal_gradient,
            "loss_total_variation": b.total_variation,
        },
        metadata={"loss_weights": {"w_char": w.w_char, "w_tg": w.w_tg,
                                   "w_tv": w.w_tv, "epsilon": w.epsilon}},
    )
