"""Deterministic synthetic clips for demos and tests."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .frames import VideoSequence


def _profile(rng, period, amplitude, smoothness):
    p = rng.uniform(-amplitude, amplitude, period)
    if smoothness > 0:
        p = gaussian_filter1d(p, smoothness, mode="wrap")
    return p


def panning_clip(height=64, width=96, n_frames=200, fps=25, period=25, velocity=1,
                 amplitude=60.0, smoothness=3.0, mean=128.0, seed=0, name="pan"):
    """Separable periodic texture ``A(x - vt) + B(y - vt)`` moving diagonally.

    When the frames sampled by the motion heuristic visit every phase of the
    ``period`` equally often, the average frame is exactly flat.
    """
    rng = np.random.default_rng(seed)
    a = _profile(rng, period, amplitude, smoothness)
    b = _profile(rng, period, amplitude, smoothness)
    xs, ys = np.arange(width), np.arange(height)
    frames = [
        mean + a[(xs - velocity * t) % period][None, :] + b[(ys - velocity * t) % period][:, None]
        for t in range(n_frames)
    ]
    return VideoSequence.from_luma(np.clip(frames, 0, 255), fps=fps, name=name)


def static_clip(height=64, width=96, n_frames=64, fps=25, amplitude=60.0, seed=0, name="static"):
    """Every frame is the same random texture."""
    rng = np.random.default_rng(seed)
    tex = np.clip(128.0 + rng.uniform(-amplitude, amplitude, (height, width)), 0, 255)
    return VideoSequence.from_luma(np.repeat(tex[None], n_frames, axis=0), fps=fps, name=name)
