import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from ldvfuse import Frame, VideoSequence

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_frame(rng, h, w, layout="mono", scale="eight_bit", integer=True):
    peak = 255 if scale == "eight_bit" else 1

    def plane(shape):
        return rng.integers(0, 256, shape).astype(float) if integer else rng.uniform(0, peak, shape)

    planes = [plane((h, w))]
    if layout == "420":
        planes += [plane(((h + 1) // 2, (w + 1) // 2)) for _ in range(2)]
    return Frame(tuple(planes), layout, scale)


def random_seq(rng, n, h, w, layout="mono", scale="eight_bit", integer=True, fps=25):
    return VideoSequence(
        tuple(random_frame(rng, h, w, layout, scale, integer) for _ in range(n)), fps
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# --- acceptance reporting ----------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    number, title = mark.args
    prev = _CRITERIA.get(number, (title, True))
    _CRITERIA[number] = (title, prev[1] and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title}")
