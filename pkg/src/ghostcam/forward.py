"""Bucket-detector forward model: object weighting plus an optical channel.

The detector integrates the illuminated object,

    clean_k = sum_{x,y} pattern_k(x, y) * object(x, y),

and the channel between object and detector (ground glass, a diffuse wall)
turns it into the recorded sample

    sample_k = g_k * clean_k + b_k + eta_k

with a per-frame gain ``g_k``, additive background ``b_k`` and readout noise
``eta_k``. All three are drawn from a stream keyed by ``(noise_seed, k)`` and
never by the pattern seed, so they carry no correlation with the patterns.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import pgm, rng
from ._font import GLYPH_HEIGHT, GLYPH_WIDTH, GLYPHS
from .errors import DimensionError, FileFormatError
from .patterns import DEFAULT_BLOCK, PatternGridSpec, SpecklePattern, pattern_block

__all__ = [
    "ObjectMode",
    "ObjectMap",
    "ChannelSpec",
    "DetectorTrace",
    "bucket_signal",
    "bucket_block",
    "channel_draws",
    "apply_channel",
    "simulate_trace",
    "make_glyph_object",
    "make_toy_target",
    "load_object_image",
    "save_object_image",
    "trace_fingerprint",
    "trace_metadata",
    "write_trace",
    "read_trace",
]


class ObjectMode(str, enum.Enum):
    TRANSMISSION = "transmission"
    REFLECTANCE = "reflectance"


@dataclass(frozen=True, eq=False)
class ObjectMap:
    """Per-pixel transmittance or reflectance in [0, 1].

    The mode is metadata only; both modes enter the bucket integral the same way.
    """

    values: np.ndarray
    mode: ObjectMode = ObjectMode.TRANSMISSION

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.size == 0:
            raise DimensionError(f"object values must be a non-empty 2-D grid, got shape {values.shape}")
        if not np.all(np.isfinite(values)) or values.min() < 0.0 or values.max() > 1.0:
            raise ValueError("object values must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mode", ObjectMode(self.mode))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def with_mode(self, mode) -> "ObjectMap":
        return ObjectMap(self.values, mode)

    def digest(self) -> str:
        return hashlib.sha256(self.values.tobytes()).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, ObjectMap):
            return NotImplemented
        return self.mode == other.mode and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class ChannelSpec:
    """Optical channel between object and bucket detector.

    Parameters
    ----------
    gain_mean : float
        Mean collection efficiency (wall albedo, geometry, glass transmission).
    gain_jitter : float
        Relative standard deviation of the per-frame gain; a rotating ground
        glass makes this nonzero.
    background_mean, background_jitter : float
        Mean and standard deviation of additive ambient light per frame.
    detector_noise_sigma : float
        Standard deviation of zero-mean readout noise; may drive samples negative.
    noise_seed : int
        Seed of the channel stream, independent of the pattern seed.
    """

    gain_mean: float = 1.0
    gain_jitter: float = 0.0
    background_mean: float = 0.0
    background_jitter: float = 0.0
    detector_noise_sigma: float = 0.0
    noise_seed: int = 0

    def __post_init__(self):
        for name in (
            "gain_mean",
            "gain_jitter",
            "background_mean",
            "background_jitter",
            "detector_noise_sigma",
        ):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {getattr(self, name)}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "noise_seed", rng.check_seed(self.noise_seed))

    @property
    def is_deterministic(self) -> bool:
        return self.gain_jitter == 0 and self.background_jitter == 0 and self.detector_noise_sigma == 0

    def replace(self, **changes) -> "ChannelSpec":
        fields = asdict(self)
        fields.update(changes)
        return ChannelSpec(**fields)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class DetectorTrace:
    samples: np.ndarray
    spec_fingerprint: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64).reshape(-1)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.shape[0]

    def __eq__(self, other):
        if not isinstance(other, DetectorTrace):
            return NotImplemented
        return (
            self.spec_fingerprint == other.spec_fingerprint
            and self.metadata == other.metadata
            and np.array_equal(self.samples, other.samples)
        )


def _check_grid(shape, obj: ObjectMap):
    if tuple(shape) != obj.shape:
        raise DimensionError(f"pattern grid {tuple(shape)} does not match object grid {obj.shape}")


def bucket_block(frames: np.ndarray, obj: ObjectMap) -> np.ndarray:
    """Clean bucket values for a (frames, height, width) block of patterns."""
    _check_grid(frames.shape[1:], obj)
    flat = frames.reshape(frames.shape[0], -1)
    # row-wise reduction so that one frame and a block of frames sum identically
    return (flat * obj.values.reshape(1, -1)).sum(axis=1)


def bucket_signal(pattern, obj: ObjectMap) -> float:
    """Total object-weighted illumination collected by the bucket detector."""
    pixels = pattern.pixels if isinstance(pattern, SpecklePattern) else np.asarray(pattern)
    if pixels.ndim != 2:
        raise DimensionError(f"pattern must be 2-D, got shape {pixels.shape}")
    return float(bucket_block(pixels[np.newaxis], obj)[0])


def channel_draws(channel: ChannelSpec, start: int, stop: int):
    """Per-frame (gain, background, readout noise) for frames ``start..stop-1``."""
    frames = stop - start
    if channel.is_deterministic:
        gain = np.full(frames, channel.gain_mean)
        background = np.full(frames, channel.background_mean)
        return gain, background, np.zeros(frames)
    words = rng.block_words(channel.noise_seed, rng.NOISE_STREAM, start, stop, 4)
    xi, zeta = rng.to_normal_pairs(words[:, 0], words[:, 1])
    eta, _ = rng.to_normal_pairs(words[:, 2], words[:, 3])
    gain = np.maximum(channel.gain_mean * (1.0 + channel.gain_jitter * xi), 0.0)
    background = np.maximum(channel.background_mean + channel.background_jitter * zeta, 0.0)
    return gain, background, channel.detector_noise_sigma * eta


def apply_channel(clean: np.ndarray, channel: ChannelSpec, start: int) -> np.ndarray:
    """Turn clean bucket values of frames ``start..`` into detector samples."""
    clean = np.asarray(clean, dtype=np.float64)
    if channel.gain_mean == 1.0 and channel.background_mean == 0.0 and channel.is_deterministic:
        return clean.copy()
    gain, background, readout = channel_draws(channel, start, start + clean.shape[0])
    return gain * clean + background + readout


def trace_fingerprint(spec: PatternGridSpec, obj: ObjectMap, channel: ChannelSpec, count: int) -> str:
    payload = {
        "patterns": spec.to_dict(),
        "generator": rng.GENERATOR_NAME,
        "object": {"shape": list(obj.shape), "mode": obj.mode.value, "sha256": obj.digest()},
        "channel": channel.to_dict(),
        "count": int(count),
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def trace_metadata(spec: PatternGridSpec, obj: ObjectMap, channel: ChannelSpec, count: int) -> dict:
    return {
        "patterns": spec.to_dict(),
        "generator": rng.GENERATOR_NAME,
        "object_mode": obj.mode.value,
        "object_sha256": obj.digest(),
        "channel": channel.to_dict(),
        "count": int(count),
    }


def _trace_range(spec, obj, channel, lo, hi):
    return apply_channel(bucket_block(pattern_block(spec, lo, hi), obj), channel, lo)


def simulate_trace(
    spec: PatternGridSpec,
    obj: ObjectMap,
    channel: ChannelSpec,
    count: int,
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK,
) -> DetectorTrace:
    """Simulate ``count`` bucket samples for frames ``0..count-1``.

    Blocks may be evaluated on several threads; every frame's randomness is
    keyed by its index, so the result does not depend on ``threads``.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    _check_grid(spec.shape, obj)
    ranges = [(lo, min(lo + block_size, count)) for lo in range(0, count, block_size)]
    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda r: _trace_range(spec, obj, channel, *r), ranges))
    else:
        parts = [_trace_range(spec, obj, channel, lo, hi) for lo, hi in ranges]
    return DetectorTrace(
        np.concatenate(parts),
        trace_fingerprint(spec, obj, channel, count),
        trace_metadata(spec, obj, channel, count),
    )


# -- objects ----------------------------------------------------------------


def make_glyph_object(text: str, width: int, height: int, scale: int | None = None,
                      mode=ObjectMode.TRANSMISSION) -> ObjectMap:
    """Render ``text`` in the built-in 5x7 font, centred on a ``height x width`` grid.

    Glyphs are separated by one blank font column. Without ``scale`` the largest
    integer magnification that fits is used.
    """
    if not text:
        raise ValueError("text must be non-empty")
    text = text.upper()
    unknown = sorted(set(text) - set(GLYPHS))
    if unknown:
        raise ValueError(f"no glyph for characters {unknown}")
    cols = len(text) * (GLYPH_WIDTH + 1) - 1
    fit = min(width // cols, height // GLYPH_HEIGHT)
    if scale is None:
        scale = fit
    if scale < 1 or scale > fit:
        raise ValueError(f"text {text!r} does not fit a {width}x{height} grid")
    strip = np.zeros((GLYPH_HEIGHT, cols), dtype=np.float64)
    for i, char in enumerate(text):
        x = i * (GLYPH_WIDTH + 1)
        strip[:, x : x + GLYPH_WIDTH] = GLYPHS[char]
    strip = np.kron(strip, np.ones((scale, scale)))
    values = np.zeros((height, width))
    top = (height - strip.shape[0]) // 2
    left = (width - strip.shape[1]) // 2
    values[top : top + strip.shape[0], left : left + strip.shape[1]] = strip
    return ObjectMap(values, mode)


def _inside_convex(u, v, polygon):
    """Mask of points inside a counter-clockwise convex polygon."""
    inside = np.ones(u.shape, dtype=bool)
    for (x0, y0), (x1, y1) in zip(polygon, polygon[1:] + polygon[:1]):
        inside &= (x1 - x0) * (v - y0) - (y1 - y0) * (u - x0) >= 0
    return inside


def make_toy_target(width: int = 64, height: int = 64) -> ObjectMap:
    """Shaded toy-plane silhouette used as a diffuse reflectance target."""
    v, u = np.mgrid[0:height, 0:width]
    u = (u + 0.5) / width * 2.0 - 1.0
    v = 1.0 - (v + 0.5) / height * 2.0
    body = (u / 0.85) ** 2 + (v / 0.13) ** 2 <= 1.0
    wing_up = _inside_convex(u, v, [(0.18, 0.08), (-0.28, 0.78), (-0.46, 0.78), (-0.14, 0.08)])
    wing_dn = _inside_convex(u, v, [(0.18, -0.08), (-0.14, -0.08), (-0.46, -0.78), (-0.28, -0.78)])
    tail_up = _inside_convex(u, v, [(-0.62, 0.05), (-0.80, 0.38), (-0.90, 0.38), (-0.82, 0.05)])
    tail_dn = _inside_convex(u, v, [(-0.62, -0.05), (-0.82, -0.05), (-0.90, -0.38), (-0.80, -0.38)])
    plane = body | wing_up | wing_dn | tail_up | tail_dn
    # lit from the upper left, rough surface rendered as a gentle ripple
    shade = 0.72 + 0.18 * (u - v) / 2.0 + 0.06 * np.cos(9.0 * u) * np.cos(7.0 * v)
    values = np.where(plane, shade, 0.0)
    cockpit = ((u - 0.55) / 0.14) ** 2 + (v / 0.07) ** 2 <= 1.0
    values[cockpit] = 0.35
    return ObjectMap(np.clip(values, 0.0, 1.0), ObjectMode.REFLECTANCE)


def load_object_image(path, width: int | None = None, height: int | None = None,
                      mode=ObjectMode.REFLECTANCE) -> ObjectMap:
    """Read an 8-bit P5 graymap, mapping 0..maxval linearly onto [0, 1].

    No resampling: if ``width``/``height`` are given they must match the file.
    """
    pixels, maxval = pgm.read_pgm(path)
    h, w = pixels.shape
    if (width is not None and width != w) or (height is not None and height != h):
        raise DimensionError(f"{path}: image is {w}x{h}, grid requires {width}x{height}")
    return ObjectMap(pixels.astype(np.float64) / maxval, mode)


def save_object_image(path, obj: ObjectMap):
    pgm.write_pgm(path, np.rint(obj.values * 255.0).astype(np.uint8))


# -- trace files ------------------------------------------------------------


def _sidecar(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_trace(path, trace: DetectorTrace):
    """CSV ``frame_index,sample_value`` plus a ``<name>.meta.json`` sidecar."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["frame_index", "sample_value"])
        for k, value in enumerate(trace.samples.tolist()):
            writer.writerow([k, repr(value)])
    meta = {"spec_fingerprint": trace.spec_fingerprint, **trace.metadata}
    _sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_trace(path) -> DetectorTrace:
    samples = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["frame_index", "sample_value"]:
            raise FileFormatError(f"{path}: expected header 'frame_index,sample_value'")
        for lineno, row in enumerate(reader, start=2):
            try:
                index, value = int(row[0]), float(row[1])
            except (IndexError, ValueError) as exc:
                raise FileFormatError(f"{path}:{lineno}: malformed row {row!r}") from exc
            if index != len(samples):
                raise FileFormatError(f"{path}:{lineno}: expected frame {len(samples)}, got {index}")
            samples.append(value)
    if not samples:
        raise FileFormatError(f"{path}: no samples")
    sidecar = _sidecar(path)
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    fingerprint = meta.pop("spec_fingerprint", "")
    return DetectorTrace(np.array(samples), fingerprint, meta)
