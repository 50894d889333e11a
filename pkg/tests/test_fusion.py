from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ldvfuse import (
    Frame,
    FusionConfig,
    FusionPlan,
    HeuristicConfig,
    Source,
    VariantSet,
    VideoSequence,
    apply_plan,
    average_frame,
    build_plan,
    convert_scale,
    detect_slow_motion,
    gradient_energy,
    select_stride,
)
from ldvfuse.errors import PlanValidityError
from ldvfuse.fusion import classify_gradient
from ldvfuse.synthetic import panning_clip, static_clip

I, S, F = Source.INTRA, Source.SHORT, Source.FULL


def numbered(n, h=2, w=3, fps=25):
    """Frame k is filled with the value k."""
    return VideoSequence.from_luma(np.arange(n, dtype=float)[:, None, None] * np.ones((1, h, w)), fps=fps)


class TestAverageFrame:
    def test_constant_video(self):
        seq = VideoSequence.from_luma(np.full((7, 3, 3), 0.1))
        for m in (1, 2, 4, 8):
            assert average_frame(seq, m).equals(seq[0])

    def test_index_set(self):
        rng = np.random.default_rng(0)
        stack = rng.uniform(0, 255, (10, 3, 4))
        out = average_frame(VideoSequence.from_luma(stack), 4)
        assert np.allclose(out.luma, stack[[0, 4, 8]].mean(axis=0), rtol=0, atol=1e-12)

    def test_single_sample(self):
        seq = numbered(3)
        assert average_frame(seq, 8).equals(seq[0])

    @given(st.integers(1, 20), st.integers(1, 10))
    def test_samples_are_multiples_of_stride(self, n, m):
        out = average_frame(numbered(n), m)
        idx = [i for i in range(n) if i % m == 0]
        assert out.luma[0, 0] == pytest.approx(sum(idx) / len(idx))


class TestStride:
    def test_low_fps(self):
        assert select_stride(25) == 4

    def test_high_fps(self):
        assert select_stride(50) == 8

    def test_boundary_is_slow_branch(self):
        assert select_stride(30) == 4
        assert select_stride(Fraction(30000, 1001)) == 4
        assert select_stride(Fraction(30001, 1000)) == 8


class TestGradientEnergy:
    def test_constant(self):
        assert gradient_energy(Frame.mono(np.full((4, 4), 3.0))) == 0

    def test_two_by_two(self):
        assert gradient_energy(Frame.mono([[0, 1], [0, 1]])) == 2

    def test_single_pixel(self):
        assert gradient_energy(Frame.mono([[5]])) == 0

    def test_normalized(self):
        assert gradient_energy(Frame.mono([[0, 1], [0, 1]]), normalize_per_pixel=True) == 0.5

    def test_scales_with_sample_scale(self):
        rng = np.random.default_rng(1)
        f = Frame.mono(rng.integers(0, 256, (5, 6)).astype(float))
        g8 = gradient_energy(f)
        gu = gradient_energy(convert_scale(f, "unit"))
        assert g8 == pytest.approx(255 * gu, rel=1e-12)


class TestDetect:
    def test_static_texture_is_slow_motion(self):
        seq = static_clip(n_frames=64)
        g = gradient_energy(seq[0])
        assert g >= 5000
        d = detect_slow_motion(seq)
        assert d.slow_motion and d.gradient == g and d.stride == 4 and d.tau == 2300

    def test_panning_texture_is_not(self):
        seq = panning_clip(n_frames=100, smoothness=0)
        assert gradient_energy(seq[0]) > 5000
        d = detect_slow_motion(seq)
        assert d.gradient < 500 and not d.slow_motion

    def test_boundary_takes_ge_branch(self):
        h = HeuristicConfig()
        assert classify_gradient(2300.0, h) is True
        assert classify_gradient(2300.0, HeuristicConfig(slow_motion_when_gradient_at_least_tau=False)) is False
        # a real frame whose energy is exactly tau: 23 steps of 100
        row = np.minimum(np.arange(24) * 100.0, 2300.0)
        seq = VideoSequence.from_luma(row[None, None, :] * np.ones((3, 1, 1)))
        d = detect_slow_motion(seq, HeuristicConfig())
        assert d.gradient == 2300.0 and d.slow_motion

    def test_unit_scale_measured_in_eight_bit_units(self):
        seq = static_clip(n_frames=8)
        unit = seq.map_frames(lambda f: convert_scale(f, "unit"))
        assert detect_slow_motion(unit).gradient == pytest.approx(detect_slow_motion(seq).gradient, rel=1e-12)

    def test_inverted_polarity(self):
        d = detect_slow_motion(static_clip(n_frames=8), HeuristicConfig(slow_motion_when_gradient_at_least_tau=False))
        assert not d.slow_motion

    def test_static_permutation_invariant(self):
        seq = static_clip(n_frames=16)
        rev = seq.with_frames(seq.frames[::-1])
        assert detect_slow_motion(seq) == detect_slow_motion(rev)


def expected_plan(n, slow, head=63):
    first = S if slow else I
    return [first] + [S] * min(head, n - 1) + [F] * max(0, n - 1 - head)


class TestBuildPlan:
    def test_three_hundred_moving(self):
        assert list(build_plan(300, False).sources) == [I] + [S] * 63 + [F] * 236

    def test_three_hundred_static(self):
        assert list(build_plan(300, True).sources) == [S] + [S] * 63 + [F] * 236

    def test_fifty(self):
        assert list(build_plan(50, False).sources) == [I] + [S] * 49

    @given(st.integers(1, 400), st.booleans())
    def test_invariants(self, n, slow):
        plan = build_plan(n, slow)
        assert len(plan) == n
        assert list(plan.sources) == expected_plan(n, slow)
        assert all(s is not I for s in plan.sources[1:])
        assert all(s is not S for s in plan.sources[64:])

    def test_summary(self):
        assert build_plan(70, False).summary() == [
            {"source": "intra", "start": 0, "stop": 1},
            {"source": "short", "start": 1, "stop": 64},
            {"source": "full", "start": 64, "stop": 70},
        ]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            FusionConfig(short_len=63, head_len=63)
        with pytest.raises(ValueError):
            FusionConfig(intra_len=0)


def variants_for(n, cfg=FusionConfig()):
    """Distinct constant offsets per variant so sources are recognisable."""
    base = numbered(n)
    shift = lambda seq, d: seq.map_frames(lambda f: f.with_planes([f.luma + d]))
    return VariantSet(base, shift(base[: cfg.short_len], 1000), shift(base[: cfg.intra_len], 2000))


class TestApplyPlan:
    def test_all_full(self):
        v = variants_for(10)
        assert apply_plan(v, FusionPlan((F,) * 10)).equals(v.full)

    def test_equal_variants(self):
        base = numbered(200)
        v = VariantSet(base, base[:154], base[:122])
        for slow in (False, True):
            assert apply_plan(v, build_plan(200, slow)).equals(base)

    @pytest.mark.parametrize("n", [1, 50, 64, 65, 154, 300])
    @pytest.mark.parametrize("slow", [False, True])
    def test_frames_come_from_assigned_source(self, n, slow):
        v = variants_for(n)
        plan = build_plan(n, slow)
        out = apply_plan(v, plan)
        assert len(out) == n
        for i, s in enumerate(plan.sources):
            assert out[i] is v.get(s)[i]

    def test_out_of_range_assignment(self):
        v = variants_for(200)
        with pytest.raises(PlanValidityError):
            apply_plan(v, FusionPlan((F,) * 199 + (I,)))
        with pytest.raises(PlanValidityError):
            apply_plan(v, FusionPlan((F,) * 10))

    def test_fps_from_full(self):
        v = variants_for(5)
        assert apply_plan(v, build_plan(5, False)).fps == v.full.fps
