"""Stand-in child process speaking Y4M on stdin/stdout.

usage: y4m_child.py MODE   (pass | drop-last | crop | fail | garbage)
"""

import sys

from ldvfuse import encode_y4m, read_y4m


def main(mode):
    data = sys.stdin.buffer.read()
    if mode == "fail":
        sys.stderr.write("encoder exploded\n")
        return 1
    if mode == "garbage":
        sys.stdout.buffer.write(b"not a stream")
        return 0
    if mode == "pass":
        sys.stdout.buffer.write(data)
        return 0
    seq = read_y4m(data)
    if mode == "drop-last":
        seq = seq[:-1]
    elif mode == "crop":
        seq = seq.with_frames([f.with_planes([f.luma[:, :-1]]) for f in seq], stream=None)
    sys.stdout.buffer.write(encode_y4m(seq))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
