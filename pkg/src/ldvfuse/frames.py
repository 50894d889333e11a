"""Frame and sequence containers, sample-scale conversion and dihedral transforms.

Samples are stored as float64 planes so that averaging and loss arithmetic is
exact to floating precision; quantization to 8 bits happens only when a stream
is written.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import EmptySequenceError, ShapeMismatchError, UnsupportedLayoutError

LAYOUTS = ("mono", "420")
SCALE_MAX = {"unit": 1.0, "eight_bit": 255.0}


def chroma_shape(height: int, width: int) -> tuple[int, int]:
    return (height + 1) // 2, (width + 1) // 2


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    if arr.ndim != 2:
        raise ShapeMismatchError(f"plane must be 2-D, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Frame:
    """One picture: a luma plane plus, for 4:2:0, two half-resolution chroma planes.

    Parameters
    ----------
    planes : sequence of array_like
        ``(H, W)`` luma first. Converted to read-only float64 copies.
    layout : {"mono", "420"}
    scale : {"eight_bit", "unit"}
        Nominal sample range, ``[0, 255]`` or ``[0, 1]``.
    tag : str
        Per-frame Y4M ``FRAME`` parameters, carried through untouched.
    """

    planes: tuple
    layout: str = "mono"
    scale: str = "eight_bit"
    tag: str = ""

    def __post_init__(self):
        if self.layout not in LAYOUTS:
            raise UnsupportedLayoutError(f"unknown chroma layout {self.layout!r}")
        if self.scale not in SCALE_MAX:
            raise ValueError(f"unknown sample scale {self.scale!r}")
        planes = tuple(_frozen(p) for p in self.planes)
        expected = 1 if self.layout == "mono" else 3
        if len(planes) != expected:
            raise ShapeMismatchError(
                f"layout {self.layout} needs {expected} planes, got {len(planes)}"
            )
        h, w = planes[0].shape
        if h < 1 or w < 1:
            raise ShapeMismatchError("frame must be at least 1x1")
        for p in planes[1:]:
            if p.shape != chroma_shape(h, w):
                raise ShapeMismatchError(
                    f"chroma plane {p.shape} does not match luma {planes[0].shape}"
                )
        object.__setattr__(self, "planes", planes)

    @classmethod
    def mono(cls, luma, scale: str = "eight_bit") -> "Frame":
        return cls((luma,), "mono", scale)

    @property
    def luma(self) -> np.ndarray:
        return self.planes[0]

    @property
    def height(self) -> int:
        return self.planes[0].shape[0]

    @property
    def width(self) -> int:
        return self.planes[0].shape[1]

    @property
    def scale_max(self) -> float:
        return SCALE_MAX[self.scale]

    @property
    def geometry(self) -> tuple:
        return (self.height, self.width, self.layout, self.scale)

    def with_planes(self, planes) -> "Frame":
        return Frame(tuple(planes), self.layout, self.scale, self.tag)

    def clamp(self) -> "Frame":
        return self.with_planes(np.clip(p, 0.0, self.scale_max) for p in self.planes)

    def equals(self, other: "Frame") -> bool:
        """Bit-exact comparison of geometry and every sample."""
        return self.geometry == other.geometry and all(
            np.array_equal(a, b) for a, b in zip(self.planes, other.planes)
        )


def convert_scale(frame: Frame, target: str) -> Frame:
    """Rescale samples between ``unit`` and ``eight_bit``; no clamping."""
    if target not in SCALE_MAX:
        raise ValueError(f"unknown sample scale {target!r}")
    if target == frame.scale:
        return frame
    factor = SCALE_MAX[target] / SCALE_MAX[frame.scale]
    return Frame(tuple(p * factor for p in frame.planes), frame.layout, target, frame.tag)


def drop_chroma(frame: Frame) -> Frame:
    return Frame((frame.luma,), "mono", frame.scale, frame.tag)


@dataclass(frozen=True, eq=False)
class VideoSequence:
    """An ordered, non-empty run of frames sharing one geometry.

    ``stream`` optionally holds the parsed Y4M header so a sequence read from
    disk can be written back byte for byte.
    """

    frames: tuple
    fps: Fraction = Fraction(25)
    name: str = ""
    stream: object = field(default=None, repr=False)

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise EmptySequenceError("a video sequence needs at least one frame")
        geom = frames[0].geometry
        for i, f in enumerate(frames):
            if f.geometry != geom:
                raise ShapeMismatchError(
                    f"frame {i} has geometry {f.geometry}, expected {geom}"
                )
        fps = Fraction(self.fps)
        if fps <= 0:
            raise ValueError("fps must be positive")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "fps", fps)

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return replace(self, frames=self.frames[item])
        return self.frames[item]

    @property
    def geometry(self) -> tuple:
        return self.frames[0].geometry

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def layout(self) -> str:
        return self.frames[0].layout

    @property
    def scale(self) -> str:
        return self.frames[0].scale

    def with_frames(self, frames: Iterable[Frame], **changes) -> "VideoSequence":
        return replace(self, frames=tuple(frames), **changes)

    def map_frames(self, fn: Callable[[Frame], Frame]) -> "VideoSequence":
        return self.with_frames(fn(f) for f in self.frames)

    def equals(self, other: "VideoSequence") -> bool:
        return (
            len(self) == len(other)
            and self.fps == other.fps
            and all(a.equals(b) for a, b in zip(self.frames, other.frames))
        )

    def luma_stack(self) -> np.ndarray:
        """``(N, H, W)`` array of luma planes."""
        return np.stack([f.luma for f in self.frames])

    @classmethod
    def from_luma(cls, stack, fps=25, name: str = "", scale: str = "eight_bit"):
        return cls(tuple(Frame.mono(a, scale) for a in np.asarray(stack)), Fraction(fps), name)


class Dihedral(enum.Enum):
    """The eight symmetries of the square.

    Each element acts as ``rot90 ** k`` (counter-clockwise) followed by an
    optional horizontal flip.
    """

    IDENTITY = (False, 0)
    ROT90 = (False, 1)
    ROT180 = (False, 2)
    ROT270 = (False, 3)
    HFLIP = (True, 0)
    HFLIP_ROT90 = (True, 1)
    HFLIP_ROT180 = (True, 2)
    HFLIP_ROT270 = (True, 3)

    @property
    def flip(self) -> bool:
        return self.value[0]

    @property
    def quarter_turns(self) -> int:
        return self.value[1]

    @property
    def swaps_axes(self) -> bool:
        return self.quarter_turns % 2 == 1

    @property
    def index(self) -> int:
        return 4 * self.flip + self.quarter_turns


DIHEDRAL_ELEMENTS = tuple(Dihedral)


def _dihedral(flip: bool, k: int) -> Dihedral:
    return Dihedral((bool(flip), k % 4))


def inverse_dihedral(t: Dihedral) -> Dihedral:
    # reflections are involutions; rotations invert their turn count
    if t.flip:
        return t
    return _dihedral(False, -t.quarter_turns)


def compose_dihedral(first: Dihedral, then: Dihedral) -> Dihedral:
    """Element equal to applying ``first`` and afterwards ``then``."""
    # F^a R^j F^b R^k = F^(a^b) R^((-1)^b j + k)
    sign = -1 if first.flip else 1
    return _dihedral(then.flip ^ first.flip, sign * then.quarter_turns + first.quarter_turns)


def dihedral_array(a: np.ndarray, t: Dihedral) -> np.ndarray:
    out = np.rot90(a, t.quarter_turns, axes=(0, 1))
    if t.flip:
        out = out[:, ::-1]
    return out


def check_dihedral_supported(frame_or_seq, t: Dihedral) -> None:
    if (
        t.swaps_axes
        and frame_or_seq.layout == "420"
        and (frame_or_seq.width % 2 or frame_or_seq.height % 2)
    ):
        raise UnsupportedLayoutError(
            f"{t.name} would misalign the 4:2:0 chroma grid of a "
            f"{frame_or_seq.width}x{frame_or_seq.height} frame"
        )


def apply_dihedral(frame: Frame, t: Dihedral) -> Frame:
    """Rotate/flip every plane of ``frame``.

    Quarter turns on 4:2:0 frames with an odd dimension raise
    :class:`UnsupportedLayoutError`; everything else is total.
    """
    if t is Dihedral.IDENTITY:
        return frame
    check_dihedral_supported(frame, t)
    return frame.with_planes(dihedral_array(p, t) for p in frame.planes)


def frame_linear_combine(frames: Sequence[Frame], weights: Sequence[float]) -> Frame:
    """Per-sample weighted sum ``sum_i w_i * f_i``. No clamping."""
    if len(frames) != len(weights):
        raise ShapeMismatchError(f"{len(frames)} frames but {len(weights)} weights")
    if not frames:
        raise ShapeMismatchError("nothing to combine")
    geom = frames[0].geometry
    for f in frames[1:]:
        if f.geometry != geom:
            raise ShapeMismatchError(f"geometry {f.geometry} differs from {geom}")
    out = []
    for k in range(len(frames[0].planes)):
        acc = weights[0] * frames[0].planes[k]
        for f, w in zip(frames[1:], weights[1:]):
            acc = acc + w * f.planes[k]
        out.append(acc)
    return Frame(tuple(out), frames[0].layout, frames[0].scale)
