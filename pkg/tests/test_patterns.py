import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ghostcam import (
    FileFormatError,
    FillMode,
    PatternGridSpec,
    TruncatedFileError,
    generate_pattern,
    load_patterns,
    pattern_stream,
    save_patterns,
)
from ghostcam.patterns import pattern_block


@pytest.mark.parametrize("mode", list(FillMode))
def test_fill_one_is_all_white(mode):
    spec = PatternGridSpec(2, 2, fill_ratio=1.0, seed=123, fill_mode=mode)
    assert generate_pattern(spec, 0).pixels.tolist() == [[1, 1], [1, 1]]


@pytest.mark.parametrize("mode", list(FillMode))
def test_fill_zero_is_all_black(mode):
    spec = PatternGridSpec(2, 2, fill_ratio=0.0, fill_mode=mode)
    assert not generate_pattern(spec, 5).pixels.any()


def test_standard_grid_has_176_white_pixels():
    spec = PatternGridSpec(40, 40, fill_ratio=0.11, seed=2024)
    assert spec.white_count == 176
    for index in (0, 1, 17, 99999):
        assert generate_pattern(spec, index).pixels.sum() == 176


def test_pixels_are_binary_uint8(small_spec):
    pixels = generate_pattern(small_spec, 3).pixels
    assert pixels.dtype == np.uint8
    assert pixels.shape == (5, 6)
    assert set(np.unique(pixels)) <= {0, 1}


@pytest.mark.parametrize(
    "kwargs",
    [dict(width=0, height=3), dict(width=3, height=0), dict(width=2, height=2, fill_ratio=-0.1),
     dict(width=2, height=2, fill_ratio=1.5), dict(width=2, height=2, seed=-1),
     dict(width=2, height=2, seed=2**64)],
)
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(ValueError):
        PatternGridSpec(**kwargs)


def test_negative_index_rejected(small_spec):
    with pytest.raises(ValueError):
        generate_pattern(small_spec, -1)


def test_stream_singleton(small_spec):
    frames = list(pattern_stream(small_spec, 1))
    assert len(frames) == 1
    assert np.array_equal(frames[0].pixels, generate_pattern(small_spec, 0).pixels)


def test_stream_exact_count_thirds():
    spec = PatternGridSpec(3, 3, fill_ratio=1 / 3, seed=9)
    counts = [p.pixels.sum() for p in pattern_stream(spec, 100)]
    assert counts == [3] * 100


def test_stream_rejects_empty(small_spec):
    with pytest.raises(ValueError):
        list(pattern_stream(small_spec, 0))


def test_stream_matches_random_access(small_spec):
    stream = [p.pixels for p in pattern_stream(small_spec, 2100)]  # spans several blocks
    for i in (0, 1, 1023, 1024, 2047, 2099):
        assert np.array_equal(stream[i], generate_pattern(small_spec, i).pixels)


@settings(max_examples=40, deadline=None)
@given(
    width=st.integers(1, 9),
    height=st.integers(1, 9),
    fill=st.floats(0, 1),
    seed=st.integers(0, 2**64 - 1),
    index=st.integers(0, 2**40),
    mode=st.sampled_from(list(FillMode)),
)
def test_determinism_and_exact_count(width, height, fill, seed, index, mode):
    spec = PatternGridSpec(width, height, fill, seed, mode)
    a = generate_pattern(spec, index).pixels
    b = generate_pattern(PatternGridSpec(width, height, fill, seed, mode), index).pixels
    assert np.array_equal(a, b)
    if mode is FillMode.EXACT_COUNT:
        assert a.sum() == int(np.floor(fill * width * height + 0.5))


def test_different_seeds_differ():
    a = pattern_block(PatternGridSpec(40, 40, seed=1), 0, 4)
    b = pattern_block(PatternGridSpec(40, 40, seed=2), 0, 4)
    assert not np.array_equal(a, b)


def test_bernoulli_mean_fill_over_full_run():
    spec = PatternGridSpec(40, 40, fill_ratio=0.11, seed=5, fill_mode="bernoulli")
    total = sum(int(block.sum()) for _, block in _blocks(spec, 18000))
    frac = total / (18000 * 1600)
    assert abs(frac - 0.11) < 0.005


def _blocks(spec, count):
    from ghostcam.patterns import iter_pattern_blocks

    return iter_pattern_blocks(spec, count, block_size=2000)


def test_bernoulli_per_pixel_rate_within_five_sigma():
    n = 10000
    spec = PatternGridSpec(8, 8, fill_ratio=0.11, seed=77, fill_mode="bernoulli")
    rate = pattern_block(spec, 0, n).mean(axis=0)
    sigma = np.sqrt(0.11 * 0.89 / n)
    assert np.all(np.abs(rate - 0.11) < 5 * sigma)


@pytest.mark.parametrize("mode", list(FillMode))
def test_two_pixels_uncorrelated_across_frames(mode):
    spec = PatternGridSpec(10, 10, fill_ratio=0.11, seed=3, fill_mode=mode)
    frames = pattern_block(spec, 0, 10000).reshape(10000, -1).astype(float)
    r = np.corrcoef(frames[:, 7], frames[:, 62])[0, 1]
    assert abs(r) < 0.05


# -- file format ------------------------------------------------------------


def test_save_load_roundtrip(tmp_path):
    spec = PatternGridSpec(2, 2, fill_ratio=0.5, seed=42, fill_mode="bernoulli")
    path = tmp_path / "p.pat"
    save_patterns(path, spec, 3)
    loaded = load_patterns(path, expected=spec)
    assert loaded.spec == spec
    assert loaded.count == 3
    assert loaded.generator == "philox4x64-10"
    assert np.array_equal(loaded.frames, pattern_block(spec, 0, 3))


def test_roundtrip_odd_sizes_pad_per_frame(tmp_path):
    spec = PatternGridSpec(5, 3, fill_ratio=0.4, seed=1)
    path = tmp_path / "p.pat"
    save_patterns(path, spec, 7, block_size=2)
    data = path.read_bytes()
    header_end = data.index(b"\n\n") + 2
    assert len(data) - header_end == 7 * 2  # 15 bits -> 2 bytes per frame
    assert np.array_equal(load_patterns(path).frames, pattern_block(spec, 0, 7))


def test_fill_ratio_survives_roundtrip_exactly(tmp_path):
    spec = PatternGridSpec(4, 4, fill_ratio=0.1 + 0.2, seed=3)
    save_patterns(tmp_path / "p.pat", spec, 1)
    assert load_patterns(tmp_path / "p.pat").spec.fill_ratio == 0.1 + 0.2


def test_corrupted_dimension_header(tmp_path):
    path = tmp_path / "p.pat"
    save_patterns(path, PatternGridSpec(2, 2, seed=1), 3)
    path.write_bytes(path.read_bytes().replace(b"width=2", b"width=x"))
    with pytest.raises(FileFormatError, match="invalid header"):
        load_patterns(path)


def test_zero_dimension_header(tmp_path):
    path = tmp_path / "p.pat"
    save_patterns(path, PatternGridSpec(2, 2, seed=1), 3)
    path.write_bytes(path.read_bytes().replace(b"height=2", b"height=0"))
    with pytest.raises(FileFormatError):
        load_patterns(path)


def test_truncated_file_names_frame(tmp_path):
    spec = PatternGridSpec(16, 4, seed=1)  # 8 bytes per frame
    path = tmp_path / "p.pat"
    save_patterns(path, spec, 5)
    path.write_bytes(path.read_bytes()[:-12])  # ends inside frame 3
    with pytest.raises(TruncatedFileError) as info:
        load_patterns(path)
    assert info.value.frame_index == 3
    assert "frame 3" in str(info.value)


def test_header_spec_mismatch(tmp_path):
    path = tmp_path / "p.pat"
    save_patterns(path, PatternGridSpec(2, 2, seed=1), 1)
    with pytest.raises(FileFormatError, match="does not match"):
        load_patterns(path, expected=PatternGridSpec(2, 2, seed=2))


def test_bad_magic(tmp_path):
    path = tmp_path / "p.pat"
    path.write_bytes(b"P5\n2 2\n255\n")
    with pytest.raises(FileFormatError, match="magic"):
        load_patterns(path)


def test_trailing_bytes_rejected(tmp_path):
    path = tmp_path / "p.pat"
    save_patterns(path, PatternGridSpec(2, 2, seed=1), 1)
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(FileFormatError, match="trailing"):
        load_patterns(path)
