"""Dihedral test-time augmentation."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .enhance import Enhancer
from .errors import ProtocolError, UnsupportedLayoutError
from .frames import (
    DIHEDRAL_ELEMENTS,
    Dihedral,
    Frame,
    VideoSequence,
    apply_dihedral,
    check_dihedral_supported,
    inverse_dihedral,
)


@dataclass(frozen=True)
class TtaConfig:
    """Which dihedral elements to run and how to reduce.

    With ``average_chroma=False`` only luma is averaged across elements and
    chroma is taken from the identity run.
    """

    elements: tuple = DIHEDRAL_ELEMENTS
    reduction: str = "mean"
    average_chroma: bool = True

    def __post_init__(self):
        elems = tuple(sorted(set(Dihedral[e] if isinstance(e, str) else Dihedral(e)
                                 for e in self.elements), key=lambda t: t.index))
        if Dihedral.IDENTITY not in elems:
            raise ValueError("the identity element must be part of the TTA set")
        if self.reduction != "mean":
            raise ValueError("only mean reduction is supported")
        object.__setattr__(self, "elements", elems)


def usable_elements(seq: VideoSequence, cfg: TtaConfig) -> tuple:
    kept, dropped = [], []
    for t in cfg.elements:
        try:
            check_dihedral_supported(seq, t)
            kept.append(t)
        except UnsupportedLayoutError:
            dropped.append(t)
    return tuple(kept), tuple(dropped)


def _run_element(seq: VideoSequence, enhancer: Enhancer, t: Dihedral) -> VideoSequence:
    tseq = seq.map_frames(lambda f: apply_dihedral(f, t))
    out = enhancer.enhance(tseq)
    if len(out) != len(tseq):
        raise ProtocolError(
            f"{enhancer.name} returned {len(out)} frames for {len(tseq)} under {t.name}"
        )
    if out.geometry != tseq.geometry:
        raise ProtocolError(
            f"{enhancer.name} changed geometry {tseq.geometry} -> {out.geometry} under {t.name}"
        )
    inv = inverse_dihedral(t)
    return out.map_frames(lambda f: apply_dihedral(f, inv))


def _mean_frames(frames: list, average_chroma: bool) -> Frame:
    # offsets from the identity run, summed in canonical element order
    ref = frames[0]
    k = len(frames)
    nplanes = len(ref.planes) if average_chroma else 1
    planes = []
    for p in range(len(ref.planes)):
        if p >= nplanes:
            planes.append(ref.planes[p])
            continue
        acc = frames[1].planes[p] - ref.planes[p] if k > 1 else 0.0
        for f in frames[2:]:
            acc = acc + (f.planes[p] - ref.planes[p])
        planes.append(ref.planes[p] + acc / k)
    return ref.with_planes(planes)


def tta_enhance(seq: VideoSequence, enhancer: Enhancer, cfg: TtaConfig = TtaConfig(),
                threads: int = 1, diagnostics: dict | None = None) -> VideoSequence:
    """Enhance every dihedral variant of ``seq``, undo the transform, average.

    Quarter-turn elements are skipped (with a warning, and listed under
    ``diagnostics["dropped_elements"]``) for 4:2:0 input with an odd
    dimension. The result does not depend on the order of ``cfg.elements``.
    """
    elements, dropped = usable_elements(seq, cfg)
    if dropped:
        names = [t.name for t in dropped]
        warnings.warn(f"TTA elements {names} dropped for odd-sized 4:2:0 input", stacklevel=2)
    if diagnostics is not None:
        diagnostics["elements"] = [t.name for t in elements]
        diagnostics["dropped_elements"] = [t.name for t in dropped]

    if threads > 1 and len(elements) > 1:
        with ThreadPoolExecutor(min(threads, len(elements))) as pool:
            outs = list(pool.map(lambda t: _run_element(seq, enhancer, t), elements))
    else:
        outs = [_run_element(seq, enhancer, t) for t in elements]

    frames = []
    for i, src in enumerate(seq.frames):
        f = _mean_frames([o.frames[i] for o in outs], cfg.average_chroma)
        frames.append(Frame(f.planes, src.layout, src.scale, src.tag))
    return seq.with_frames(frames)


class TtaEnhancer(Enhancer):
    """Wraps another enhancer so that every call runs under TTA."""

    def __init__(self, inner: Enhancer, cfg: TtaConfig = TtaConfig(), threads: int = 1):
        self.inner = inner
        self.cfg = cfg
        self.threads = threads
        self.name = f"tta[{len(cfg.elements)}]({inner.name})"
        self.deterministic = inner.deterministic
        self.diagnostics = {}

    def enhance(self, seq):
        return tta_enhance(seq, self.inner, self.cfg, self.threads, self.diagnostics)
