"""YUV4MPEG2 and headerless planar YUV reading/writing, plus report emission."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import EmptySequenceError, StreamFormatError, TruncationError, UnsupportedFormatError
from .frames import Frame, VideoSequence, chroma_shape, convert_scale

MAGIC = b"YUV4MPEG2"
FRAME_MARKER = b"FRAME"
CHROMA_TAGS = {"420": "420", "420jpeg": "420", "420mpeg2": "420", "mono": "mono"}


@dataclass
class StreamHeader:
    """Parsed Y4M stream header.

    ``tokens`` keeps the original parameter tokens in file order so a stream can
    be re-emitted verbatim; the typed fields are views onto them.
    """

    width: int
    height: int
    fps_num: int
    fps_den: int
    chroma: str = "420jpeg"
    interlacing: str = "p"
    aspect: str = "0:0"
    extensions: list = field(default_factory=list)
    tokens: list = field(default_factory=list)

    @property
    def fps(self) -> Fraction:
        return Fraction(self.fps_num, self.fps_den)

    @property
    def layout(self) -> str:
        return CHROMA_TAGS[self.chroma]


def _parse_ratio(text: str, what: str) -> tuple[int, int]:
    num, sep, den = text.partition(":")
    try:
        n, d = int(num), int(den)
    except ValueError:
        raise StreamFormatError(f"malformed {what} token {text!r}") from None
    if not sep:
        raise StreamFormatError(f"malformed {what} token {text!r}")
    return n, d


def parse_header(line: bytes) -> StreamHeader:
    try:
        text = line.decode("ascii")
    except UnicodeDecodeError:
        raise StreamFormatError("header is not ASCII") from None
    parts = text.split(" ")
    if parts[0] != MAGIC.decode():
        raise StreamFormatError("missing YUV4MPEG2 magic")
    tokens = parts[1:]
    fields = {}
    extensions = []
    for tok in tokens:
        if not tok:
            raise StreamFormatError("empty header token")
        key, val = tok[0], tok[1:]
        if key == "X":
            extensions.append(val)
        elif key in "WHFIAC":
            fields[key] = val
        else:
            raise StreamFormatError(f"unknown header token {tok!r}")
    for req in "WHF":
        if req not in fields:
            raise StreamFormatError(f"header lacks the {req} parameter")
    try:
        width, height = int(fields["W"]), int(fields["H"])
    except ValueError:
        raise StreamFormatError("non-integer frame dimensions") from None
    if width < 1 or height < 1:
        raise StreamFormatError(f"invalid dimensions {width}x{height}")
    num, den = _parse_ratio(fields["F"], "frame rate")
    if num < 1 or den < 1:
        raise StreamFormatError(f"invalid frame rate {fields['F']}")
    chroma = fields.get("C", "420jpeg")
    if chroma not in CHROMA_TAGS:
        raise UnsupportedFormatError(f"unsupported chroma tag C{chroma}")
    return StreamHeader(
        width, height, num, den, chroma,
        fields.get("I", "p"), fields.get("A", "0:0"), extensions, tokens,
    )


def frame_plane_shapes(width: int, height: int, layout: str) -> list:
    shapes = [(height, width)]
    if layout == "420":
        shapes += [chroma_shape(height, width)] * 2
    return shapes


def frame_nbytes(width: int, height: int, layout: str) -> int:
    return sum(h * w for h, w in frame_plane_shapes(width, height, layout))


def _planes_from_bytes(buf, width, height, layout):
    planes, off = [], 0
    for h, w in frame_plane_shapes(width, height, layout):
        n = h * w
        planes.append(np.frombuffer(buf, np.uint8, n, off).reshape(h, w))
        off += n
    return planes


def _read_all(source) -> bytes:
    if isinstance(source, (bytes, bytearray, memoryview)):
        return bytes(source)
    return source.read()


def read_y4m(source, name: str = "") -> VideoSequence:
    """Parse a YUV4MPEG2 stream from bytes or a binary file object.

    Raises
    ------
    StreamFormatError
        Missing magic, malformed header or frame marker.
    UnsupportedFormatError
        Chroma tag other than 420/420jpeg/420mpeg2/mono.
    TruncationError
        The stream ends inside a header, frame marker or frame payload.
    EmptySequenceError
        Valid header but no frames.
    """
    data = _read_all(source)
    if not data:
        raise StreamFormatError("empty stream")
    if not data.startswith(MAGIC[: len(data)]) or (
        len(data) > len(MAGIC) and data[len(MAGIC)] not in b" \n"
    ):
        raise StreamFormatError("missing YUV4MPEG2 magic")
    eol = data.find(b"\n")
    if eol < 0:
        raise TruncationError("stream ends inside the header")
    header = parse_header(data[:eol])
    layout = header.layout
    size = frame_nbytes(header.width, header.height, layout)
    pos = eol + 1
    frames = []
    while pos < len(data):
        idx = len(frames)
        head = data[pos : pos + len(FRAME_MARKER)]
        if head != FRAME_MARKER:
            if FRAME_MARKER.startswith(head):
                raise TruncationError(f"stream ends inside frame {idx} marker", idx)
            raise StreamFormatError(f"expected FRAME marker for frame {idx} at byte {pos}")
        eol = data.find(b"\n", pos)
        if eol < 0:
            raise TruncationError(f"stream ends inside frame {idx} marker", idx)
        tag = data[pos + len(FRAME_MARKER) : eol]
        if tag and not tag.startswith(b" "):
            raise StreamFormatError(f"malformed FRAME marker for frame {idx}")
        start = eol + 1
        if start + size > len(data):
            raise TruncationError(
                f"frame {idx} payload truncated: {len(data) - start} of {size} bytes", idx
            )
        planes = _planes_from_bytes(data[start : start + size], header.width, header.height, layout)
        frames.append(Frame(tuple(planes), layout, "eight_bit", tag.decode("latin-1")))
        pos = start + size
    if not frames:
        raise EmptySequenceError("stream contains no frames")
    return VideoSequence(tuple(frames), header.fps, name, header)


def quantize_8bit(plane: np.ndarray) -> np.ndarray:
    """Round half away from zero, then clamp to ``[0, 255]``."""
    q = np.sign(plane) * np.floor(np.abs(plane) + 0.5)
    return np.clip(q, 0, 255).astype(np.uint8)


def _header_tokens(seq: VideoSequence, chroma_tag: str) -> list:
    hdr = seq.stream if isinstance(seq.stream, StreamHeader) else None
    fps = seq.fps
    if hdr is None:
        return [
            f"W{seq.width}", f"H{seq.height}",
            f"F{fps.numerator}:{fps.denominator}", "Ip", "A1:1", f"C{chroma_tag}",
        ]
    out, seen_c = [], False
    for tok in hdr.tokens:
        key = tok[0]
        if key == "W":
            tok = f"W{seq.width}"
        elif key == "H":
            tok = f"H{seq.height}"
        elif key == "F" and hdr.fps != fps:
            tok = f"F{fps.numerator}:{fps.denominator}"
        elif key == "C":
            seen_c = True
            if CHROMA_TAGS[tok[1:]] != CHROMA_TAGS[chroma_tag]:
                tok = f"C{chroma_tag}"
        out.append(tok)
    if not seen_c and chroma_tag != "420jpeg":
        out.append(f"C{chroma_tag}")
    return out


def encode_y4m(seq: VideoSequence, chroma: str | None = None) -> bytes:
    """Serialize to YUV4MPEG2 bytes.

    ``chroma`` forces the output layout: mono frames written as ``"420"`` get
    neutral (128) chroma, 4:2:0 frames written as ``"mono"`` lose theirs.
    """
    layout = chroma or seq.layout
    if layout not in ("mono", "420"):
        raise UnsupportedFormatError(f"cannot write chroma layout {layout!r}")
    if isinstance(seq.stream, StreamHeader) and CHROMA_TAGS[seq.stream.chroma] == layout:
        tag = seq.stream.chroma
    else:
        tag = "mono" if layout == "mono" else "420jpeg"
    parts = [b" ".join([MAGIC] + [t.encode("ascii") for t in _header_tokens(seq, tag)]) + b"\n"]
    cshape = chroma_shape(seq.height, seq.width)
    for f in seq.frames:
        f = convert_scale(f, "eight_bit")
        planes = [f.luma]
        if layout == "420":
            planes += list(f.planes[1:]) if f.layout == "420" else [np.full(cshape, 128.0)] * 2
        parts.append(FRAME_MARKER + f.tag.encode("latin-1") + b"\n")
        parts.extend(quantize_8bit(p).tobytes() for p in planes)
    return b"".join(parts)


def write_y4m(seq: VideoSequence, sink, chroma: str | None = None) -> None:
    sink.write(encode_y4m(seq, chroma))


def load_y4m(path) -> VideoSequence:
    path = Path(path)
    with open(path, "rb") as fh:
        return read_y4m(fh, name=path.stem)


def save_y4m(seq: VideoSequence, path, chroma: str | None = None) -> None:
    with open(path, "wb") as fh:
        write_y4m(seq, fh, chroma)


def read_raw_yuv(source, width: int, height: int, layout: str = "420", fps=25, name: str = ""):
    """Slice a headerless planar 8-bit stream into frames; fps comes from the caller."""
    data = _read_all(source)
    size = frame_nbytes(width, height, layout)
    if not data:
        raise EmptySequenceError("raw stream is empty")
    if len(data) % size:
        raise TruncationError(
            f"{len(data)} bytes is not a multiple of the {size}-byte frame size",
            len(data) // size,
        )
    frames = [
        Frame(tuple(_planes_from_bytes(data[i : i + size], width, height, layout)), layout)
        for i in range(0, len(data), size)
    ]
    return VideoSequence(tuple(frames), Fraction(fps), name)


def encode_raw_yuv(seq: VideoSequence) -> bytes:
    return b"".join(
        quantize_8bit(p).tobytes()
        for f in seq.frames
        for p in convert_scale(f, "eight_bit").planes
    )


# --- reports ---------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else f"{float(v):.6f}"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if math.isnan(v) else round(v, 6)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return v


def report_to_csv(report, include_summary: bool = False) -> str:
    """Per-frame table: ``frame_index`` then one column per series, in insertion order.

    Missing values (NaN or beyond a shorter series) are left empty. With
    ``include_summary`` the aggregates and metadata precede the table as
    ``# key: value`` comment lines.
    """
    buf = io.StringIO()
    if include_summary:
        for k, v in list(report.metadata.items()) + list(report.aggregates.items()):
            buf.write(f"# {k}: {json.dumps(_jsonable(v))}\n")
    w = csv.writer(buf, lineterminator="\n")
    names = list(report.series)
    w.writerow(["frame_index"] + names)
    nrows = max((len(s) for s in report.series.values()), default=0)
    for i in range(nrows):
        row = [str(i)]
        for n in names:
            s = report.series[n]
            row.append(_fmt(s[i]) if i < len(s) else "")
        w.writerow(row)
    return buf.getvalue()


def report_to_json(report) -> str:
    doc = {
        "metadata": report.metadata,
        "aggregates": report.aggregates,
        "series": report.series,
    }
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def write_report(report, fmt: str, sink, include_summary: bool = False) -> None:
    """Write ``report`` as ``"csv"`` or ``"json"`` to a text or binary sink."""
    if fmt == "csv":
        text = report_to_csv(report, include_summary)
    elif fmt == "json":
        text = report_to_json(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if isinstance(sink, io.TextIOBase):
        sink.write(text)
    else:
        sink.write(text.encode("utf-8"))
