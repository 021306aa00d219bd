import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ghostcam import (
    ChannelSpec,
    DimensionError,
    FileFormatError,
    ObjectMap,
    PatternGridSpec,
    bucket_signal,
    generate_pattern,
    load_object_image,
    make_glyph_object,
    save_object_image,
    simulate_trace,
)
from ghostcam._font import GLYPHS
from ghostcam.forward import channel_draws, make_toy_target, read_trace, write_trace
from ghostcam.patterns import pattern_block
from ghostcam import pgm


def test_bucket_all_ones_pattern():
    assert bucket_signal(np.ones((2, 2)), ObjectMap([[1, 0], [0, 1]])) == 2


def test_bucket_dark_pattern():
    assert bucket_signal(np.zeros((3, 3)), ObjectMap(np.full((3, 3), 0.7))) == 0


def test_bucket_single_pixel():
    assert bucket_signal(np.array([[1, 0], [0, 0]]), ObjectMap([[0.5, 1], [1, 1]])) == 0.5


def test_bucket_dimension_mismatch():
    with pytest.raises(DimensionError):
        bucket_signal(np.ones((2, 3)), ObjectMap(np.ones((3, 2))))


def test_object_range_checked():
    with pytest.raises(ValueError):
        ObjectMap([[1.2]])
    with pytest.raises(ValueError):
        ObjectMap([[-0.1]])


grid = arrays(np.float64, (4, 5), elements=st.floats(0, 1))
pattern = arrays(np.uint8, (4, 5), elements=st.integers(0, 1))


@settings(max_examples=60, deadline=None)
@given(p=pattern, values=grid, a=st.floats(0, 1))
def test_bucket_linear_in_object(p, values, a):
    base = bucket_signal(p, ObjectMap(values))
    assert bucket_signal(p, ObjectMap(a * values)) == pytest.approx(a * base, rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(p=pattern, values=grid, split=arrays(bool, (4, 5)))
def test_bucket_additive_over_disjoint_supports(p, values, split):
    left = ObjectMap(np.where(split, values, 0.0))
    right = ObjectMap(np.where(split, 0.0, values))
    total = bucket_signal(p, ObjectMap(values))
    assert bucket_signal(p, left) + bucket_signal(p, right) == pytest.approx(total, rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(p=pattern, values=grid, extra=arrays(np.uint8, (4, 5), elements=st.integers(0, 1)))
def test_bucket_monotone_in_white_pixels(p, values, extra):
    obj = ObjectMap(values)
    assert bucket_signal(p | extra, obj) >= bucket_signal(p, obj)


def test_noiseless_trace_equals_bucket_sums(small_spec):
    obj = ObjectMap(np.linspace(0, 1, 30).reshape(5, 6))
    trace = simulate_trace(small_spec, obj, ChannelSpec(), 50)
    expected = [bucket_signal(generate_pattern(small_spec, k), obj) for k in range(50)]
    assert trace.samples.tolist() == expected


def test_linear_gain_halves_samples(small_spec):
    obj = ObjectMap(np.linspace(0, 1, 30).reshape(5, 6))
    full = simulate_trace(small_spec, obj, ChannelSpec(), 40).samples
    half = simulate_trace(small_spec, obj, ChannelSpec(gain_mean=0.5), 40).samples
    assert np.array_equal(half, 0.5 * full)


def test_transparent_object_standard_grid(grid40_spec):
    trace = simulate_trace(grid40_spec, ObjectMap(np.ones((40, 40))), ChannelSpec(), 300)
    assert np.all(trace.samples == 176)


def test_trace_threads_and_blocks_do_not_matter(small_spec):
    obj = ObjectMap(np.linspace(0, 1, 30).reshape(5, 6))
    ch = ChannelSpec(gain_mean=0.3, gain_jitter=0.2, background_mean=2, background_jitter=0.5,
                     detector_noise_sigma=0.1, noise_seed=5)
    a = simulate_trace(small_spec, obj, ch, 3000)
    b = simulate_trace(small_spec, obj, ch, 3000, threads=4, block_size=257)
    assert a == b


def test_trace_prefix_consistency(small_spec):
    obj = ObjectMap(np.full((5, 6), 0.5))
    ch = ChannelSpec(gain_jitter=0.3, detector_noise_sigma=0.2, noise_seed=8)
    long = simulate_trace(small_spec, obj, ch, 2000).samples
    short = simulate_trace(small_spec, obj, ch, 700).samples
    assert np.array_equal(long[:700], short)


def test_negative_channel_parameters_rejected():
    for name in ("gain_mean", "gain_jitter", "background_mean", "background_jitter", "detector_noise_sigma"):
        with pytest.raises(ValueError):
            ChannelSpec(**{name: -1.0})


def test_gain_clamped_at_zero():
    gain, background, _ = channel_draws(ChannelSpec(gain_jitter=5.0, background_jitter=5.0, noise_seed=1), 0, 5000)
    assert gain.min() == 0.0 and background.min() == 0.0
    assert gain.max() > 0.0


def test_channel_draw_moments():
    ch = ChannelSpec(gain_mean=2.0, gain_jitter=0.1, background_mean=3.0, background_jitter=0.5,
                     detector_noise_sigma=0.25, noise_seed=4)
    gain, bg, eta = channel_draws(ch, 0, 40000)
    assert gain.mean() == pytest.approx(2.0, abs=0.01)
    assert gain.std() == pytest.approx(0.2, rel=0.03)
    assert bg.mean() == pytest.approx(3.0, abs=0.02)
    assert bg.std() == pytest.approx(0.5, rel=0.03)
    assert eta.mean() == pytest.approx(0.0, abs=0.01)
    assert eta.std() == pytest.approx(0.25, rel=0.03)


def test_gain_independent_of_pattern_pixels():
    seed = 99  # same integer for both streams; separate stream keys keep them apart
    spec = PatternGridSpec(10, 10, fill_ratio=0.11, seed=seed)
    gain, _, _ = channel_draws(ChannelSpec(gain_jitter=0.2, noise_seed=seed), 0, 10000)
    frames = pattern_block(spec, 0, 10000).reshape(10000, -1).astype(float)
    for pixel in (0, 37, 99):
        assert abs(np.corrcoef(gain, frames[:, pixel])[0, 1]) < 0.05


def test_transmission_reflectance_symmetry(small_spec):
    values = np.linspace(0, 1, 30).reshape(5, 6)
    ch = ChannelSpec(gain_jitter=0.1, noise_seed=3)
    a = simulate_trace(small_spec, ObjectMap(values, "transmission"), ch, 500)
    b = simulate_trace(small_spec, ObjectMap(values, "reflectance"), ch, 500)
    assert np.array_equal(a.samples, b.samples)


def test_fingerprint_binds_inputs(small_spec):
    obj = ObjectMap(np.full((5, 6), 0.5))
    base = simulate_trace(small_spec, obj, ChannelSpec(), 10).spec_fingerprint
    assert simulate_trace(small_spec.replace(seed=12), obj, ChannelSpec(), 10).spec_fingerprint != base
    assert simulate_trace(small_spec, obj, ChannelSpec(gain_mean=0.9), 10).spec_fingerprint != base
    assert simulate_trace(small_spec, ObjectMap(np.full((5, 6), 0.4)), ChannelSpec(), 10).spec_fingerprint != base


def test_trace_file_roundtrip(tmp_path, small_spec):
    obj = ObjectMap(np.full((5, 6), 0.3))
    trace = simulate_trace(small_spec, obj, ChannelSpec(detector_noise_sigma=0.7, noise_seed=2), 25)
    write_trace(tmp_path / "t.csv", trace)
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "frame_index,sample_value"
    assert read_trace(tmp_path / "t.csv") == trace


def test_trace_file_bad_rows(tmp_path):
    (tmp_path / "t.csv").write_text("frame_index,sample_value\n0,1.0\n2,3.0\n")
    with pytest.raises(FileFormatError, match="expected frame 1"):
        read_trace(tmp_path / "t.csv")


# -- glyph objects ----------------------------------------------------------


def test_glyph_x_pixel_count():
    obj = make_glyph_object("X", 40, 40)
    scale = min(40 // 5, 40 // 7)
    glyph_pixels = sum(map(sum, GLYPHS["X"]))
    assert set(np.unique(obj.values)) == {0.0, 1.0}
    assert obj.values.sum() == glyph_pixels * scale**2


def test_glyph_xjtu_layout(xjtu):
    assert xjtu.shape == (40, 40)
    assert xjtu.values.sum() == 13 + 11 + 11 + 15
    rows, cols = np.nonzero(xjtu.values)
    # 23x7 text block centred on the grid
    assert (rows.min(), rows.max()) == (16, 22)
    assert (cols.min(), cols.max()) == (8, 30)


def test_glyph_deterministic():
    assert make_glyph_object("XJTU", 40, 40) == make_glyph_object("xjtu", 40, 40)


def test_glyph_does_not_fit():
    with pytest.raises(ValueError, match="does not fit"):
        make_glyph_object("XJTU", 4, 4)


def test_glyph_rejects_unknown_and_empty():
    with pytest.raises(ValueError):
        make_glyph_object("", 40, 40)
    with pytest.raises(ValueError):
        make_glyph_object("X@", 40, 40)


def test_glyph_scale_auto_and_explicit():
    assert make_glyph_object("XJTU", 80, 80).values.sum() == 50 * 9  # 80 // 23 = 3
    assert make_glyph_object("XJTU", 80, 80, scale=2).values.sum() == 50 * 4
    with pytest.raises(ValueError):
        make_glyph_object("XJTU", 40, 40, scale=2)


# -- object images ----------------------------------------------------------


def test_max_image_is_all_ones(tmp_path):
    pgm.write_pgm(tmp_path / "w.pgm", np.full((3, 4), 255, np.uint8))
    obj = load_object_image(tmp_path / "w.pgm")
    assert obj.shape == (3, 4) and np.all(obj.values == 1.0)


def test_zero_image_is_all_zeros(tmp_path):
    pgm.write_pgm(tmp_path / "b.pgm", np.zeros((3, 4), np.uint8))
    assert not load_object_image(tmp_path / "b.pgm").values.any()


def test_image_roundtrip_bytes(tmp_path):
    raster = np.arange(64 * 64, dtype=np.uint32).reshape(64, 64) % 256
    pgm.write_pgm(tmp_path / "a.pgm", raster.astype(np.uint8))
    save_object_image(tmp_path / "b.pgm", load_object_image(tmp_path / "a.pgm"))
    assert (tmp_path / "a.pgm").read_bytes() == (tmp_path / "b.pgm").read_bytes()


def test_image_dimension_mismatch(tmp_path):
    pgm.write_pgm(tmp_path / "a.pgm", np.zeros((3, 4), np.uint8))
    with pytest.raises(DimensionError):
        load_object_image(tmp_path / "a.pgm", width=8, height=8)


def test_toy_target_is_valid_reflectance():
    obj = make_toy_target(64, 64)
    assert obj.mode.value == "reflectance"
    assert 0.1 < (obj.values > 0).mean() < 0.5
    assert obj.values.max() <= 1.0
