"""Low-delay coding structure: frame roles, segmentation, a blockwise-DCT
degradation simulator and a pipe bridge to real encoders."""

from __future__ import annotations

import enum
import shlex
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dctn, idctn

from .errors import EmptySequenceError, ExternalToolError, ProtocolError, StreamFormatError
from .frames import Frame, VideoSequence, convert_scale
from .vio import encode_y4m, read_y4m


def default_hierarchy(gop_size: int) -> dict:
    """Last offset of each group is the anchor (level 0); the rest are level 1."""
    return {off: (0 if off == gop_size - 1 else 1) for off in range(gop_size)}


@dataclass(frozen=True)
class GopConfig:
    gop_size: int = 4
    intra_index: int = 0
    hierarchy_levels: dict = None

    def __post_init__(self):
        if self.gop_size < 1:
            raise ValueError("gop_size must be >= 1")
        if self.intra_index != 0:
            raise ValueError("low-delay coding has its single intra frame at index 0")
        levels = self.hierarchy_levels
        if levels is None:
            levels = default_hierarchy(self.gop_size)
        levels = {int(k): int(v) for k, v in levels.items()}
        missing = set(range(self.gop_size)) - set(levels)
        if missing:
            raise ValueError(f"hierarchy map lacks offsets {sorted(missing)}")
        object.__setattr__(self, "hierarchy_levels", levels)

    @property
    def levels(self) -> list:
        return sorted(set(self.hierarchy_levels.values()))


class Kind(enum.Enum):
    INTRA = "intra"
    INTER = "inter"


@dataclass(frozen=True)
class FrameKind:
    kind: Kind
    gop_offset: int | None = None
    level: int | None = None

    @property
    def is_intra(self) -> bool:
        return self.kind is Kind.INTRA


def classify_frame(index: int, cfg: GopConfig = GopConfig()) -> FrameKind:
    if index < 0:
        raise ValueError("frame index must be non-negative")
    if index == cfg.intra_index:
        return FrameKind(Kind.INTRA)
    offset = (index - 1) % cfg.gop_size
    return FrameKind(Kind.INTER, offset, cfg.hierarchy_levels[offset])


def segment_video(seq: VideoSequence, segment_len: int = 30) -> list:
    """Cut into non-overlapping ``segment_len``-frame clips; the remainder is dropped."""
    if segment_len < 1:
        raise ValueError("segment_len must be >= 1")
    count = len(seq) // segment_len
    return [
        seq.with_frames(
            seq.frames[i * segment_len : (i + 1) * segment_len],
            name=f"{seq.name}_seg{i:03d}",
        )
        for i in range(count)
    ]


@dataclass(frozen=True)
class DegradationProfile:
    """Quantization steps for the DCT simulator.

    ``level_steps`` maps hierarchy level to step. A step of 0 disables
    quantization. ``dither`` adds seeded uniform noise of that amplitude to the
    coefficients before quantization; 0 keeps the simulator deterministic
    regardless of seed.
    """

    intra_step: float = 2.0
    level_steps: dict = field(default_factory=lambda: {0: 12.0, 1: 16.0})
    block_size: int = 8
    dither: float = 0.0

    def __post_init__(self):
        steps = {int(k): float(v) for k, v in self.level_steps.items()}
        object.__setattr__(self, "level_steps", steps)
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if self.intra_step < 0 or any(s < 0 for s in steps.values()):
            raise ValueError("quantization steps must be non-negative")
        if steps and self.intra_step > min(steps.values()):
            raise ValueError("intra step must not exceed any inter-level step")
        if self.dither < 0:
            raise ValueError("dither must be non-negative")

    @classmethod
    def uniform(cls, intra_step: float, inter_step: float, gop: GopConfig = GopConfig(), **kw):
        return cls(intra_step, {lvl: inter_step for lvl in gop.levels}, **kw)

    def step_for(self, kind: FrameKind) -> float:
        if kind.is_intra:
            return self.intra_step
        return self.level_steps[kind.level]


def quantize_plane(plane: np.ndarray, step: float, block: int, scale_max: float,
                   rng: np.random.Generator | None = None, dither: float = 0.0) -> np.ndarray:
    """Blockwise orthonormal DCT-II, uniform coefficient quantization, inverse, clamp."""
    h, w = plane.shape
    ph, pw = -h % block, -w % block
    padded = np.pad(plane, ((0, ph), (0, pw)), mode="edge")
    H, W = padded.shape
    blocks = padded.reshape(H // block, block, W // block, block).swapaxes(1, 2)
    coef = dctn(blocks, type=2, norm="ortho", axes=(2, 3))
    if dither > 0 and rng is not None:
        coef = coef + rng.uniform(-dither, dither, coef.shape)
    if step > 0:
        coef = np.round(coef / step) * step
    rec = idctn(coef, type=2, norm="ortho", axes=(2, 3))
    rec = rec.swapaxes(1, 2).reshape(H, W)[:h, :w]
    return np.clip(rec, 0.0, scale_max)


def degrade_frame(frame: Frame, step: float, block: int, seed: int | None = None,
                  dither: float = 0.0) -> Frame:
    rng = np.random.default_rng(seed) if dither > 0 else None
    return frame.with_planes(
        quantize_plane(p, step, block, frame.scale_max, rng, dither) for p in frame.planes
    )


def simulate_low_delay(seq: VideoSequence, cfg: GopConfig = GopConfig(),
                       prof: DegradationProfile = DegradationProfile(), seed: int = 0,
                       threads: int = 1) -> VideoSequence:
    """Degrade each frame with the step its low-delay role implies.

    The intra frame gets ``prof.intra_step``; inter frames the step of their
    hierarchy level. Frames are independent, so ``threads > 1`` only changes
    wall time. With dither enabled, frame ``k`` draws from ``seed + k``.
    """
    def work(k):
        step = prof.step_for(classify_frame(k, cfg))
        return degrade_frame(seq.frames[k], step, prof.block_size, seed + k, prof.dither)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            frames = list(pool.map(work, range(len(seq))))
    else:
        frames = [work(k) for k in range(len(seq))]
    return seq.with_frames(frames)


def run_pipe(seq: VideoSequence, command: str, what: str = "external tool",
             timeout: float | None = None) -> VideoSequence:
    """Stream ``seq`` as Y4M into ``command`` and parse the Y4M it prints.

    The command runs through the shell so templates may contain pipelines.
    Frame count and geometry are checked against the input.
    """
    try:
        proc = subprocess.run(command, shell=True, input=encode_y4m(seq),
                              capture_output=True, timeout=timeout)
    except subprocess.TimeoutExpired as exc:
        raise ExternalToolError(f"{what} timed out: {command}", None, exc.stderr or b"") from None
    if proc.returncode != 0:
        raise ExternalToolError(
            f"{what} exited with status {proc.returncode}: "
            f"{proc.stderr.decode(errors='replace').strip()[-500:]}",
            proc.returncode, proc.stderr,
        )
    try:
        out = read_y4m(proc.stdout, name=seq.name)
    except (StreamFormatError, EmptySequenceError) as exc:
        raise ProtocolError(f"{what} produced an unreadable Y4M stream: {exc}") from exc
    if len(out) != len(seq):
        raise ProtocolError(f"{what} returned {len(out)} frames, expected {len(seq)}")
    if (out.width, out.height) != (seq.width, seq.height):
        raise ProtocolError(
            f"{what} returned {out.width}x{out.height} frames, expected {seq.width}x{seq.height}"
        )
    if out.layout != seq.layout:
        raise ProtocolError(f"{what} returned {out.layout} chroma, expected {seq.layout}")
    if out.scale != seq.scale:
        out = out.map_frames(lambda f: convert_scale(f, seq.scale))
    return out.with_frames(out.frames, fps=seq.fps, stream=seq.stream)


def encode_external(seq: VideoSequence, command_template: str, extra_args: str = "",
                    timeout: float | None = None) -> VideoSequence:
    """Round-trip ``seq`` through an encoder+decoder wrapper speaking Y4M on stdio.

    ``{extra_args}`` in the template is replaced by ``extra_args`` (shell-quoted
    per token); QP, preset and similar knobs belong there or in the template.
    """
    args = " ".join(shlex.quote(a) for a in shlex.split(extra_args))
    command = command_template.replace("{extra_args}", args)
    return run_pipe(seq, command, "encoder", timeout)
