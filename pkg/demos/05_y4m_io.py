"""Y4M round trip and truncation handling."""

import numpy as np

from ldvfuse import VideoSequence, encode_y4m, read_y4m
from ldvfuse.errors import LdvError

seq = VideoSequence.from_luma(np.arange(3 * 5 * 7).reshape(3, 5, 7) % 256, fps=30)
data = encode_y4m(seq, chroma="420")
print(data.split(b"\n", 1)[0].decode())
again = read_y4m(data)
print("byte-identical:", encode_y4m(again) == data)

for cut in (10, len(data) // 2, len(data) - 1):
    try:
        print(cut, "->", len(read_y4m(data[:cut])), "frames")
    except LdvError as exc:
        print(cut, "->", exc.code, exc)
