"""Seeded binary speckle patterns with random access by frame index.

A pattern is a ``height x width`` grid of 0/1 illumination values. Frame ``k``
is a pure function of ``(spec, k)``: each pixel takes one raw Philox word from
the frame's own counter block. In ``bernoulli`` mode a pixel is white when its
word, read as a uniform in [0, 1), falls below ``fill_ratio``. In
``exact_count`` mode the ``round(fill_ratio * width * height)`` pixels with the
smallest words are white.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import rng
from .errors import FileFormatError, TruncatedFileError

__all__ = [
    "FillMode",
    "PatternGridSpec",
    "SpecklePattern",
    "PatternFile",
    "generate_pattern",
    "pattern_block",
    "iter_pattern_blocks",
    "pattern_stream",
    "save_patterns",
    "load_patterns",
]

DEFAULT_BLOCK = 1024


class FillMode(str, enum.Enum):
    BERNOULLI = "bernoulli"
    EXACT_COUNT = "exact_count"


@dataclass(frozen=True)
class PatternGridSpec:
    """Geometry, density and seed of a pattern stream."""

    width: int
    height: int
    fill_ratio: float = 0.11
    seed: int = 0
    fill_mode: FillMode = FillMode.EXACT_COUNT

    def __post_init__(self):
        for name in ("width", "height"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise TypeError(f"{name} must be an integer")
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        ratio = float(self.fill_ratio)
        if not 0.0 <= ratio <= 1.0:
            raise ValueError(f"fill_ratio must lie in [0, 1], got {self.fill_ratio}")
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))
        object.__setattr__(self, "fill_ratio", ratio)
        object.__setattr__(self, "seed", rng.check_seed(self.seed))
        object.__setattr__(self, "fill_mode", FillMode(self.fill_mode))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    @property
    def white_count(self) -> int:
        """White pixels per frame in exact_count mode (half rounds up)."""
        return int(math.floor(self.fill_ratio * self.n_pixels + 0.5))

    def replace(self, **changes) -> "PatternGridSpec":
        fields = self.to_dict()
        fields.update(changes)
        return PatternGridSpec(**fields)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "fill_ratio": self.fill_ratio,
            "seed": self.seed,
            "fill_mode": self.fill_mode.value,
        }


@dataclass(frozen=True)
class SpecklePattern:
    index: int
    pixels: np.ndarray  # uint8, shape (height, width), values in {0, 1}


def _binarize(words: np.ndarray, spec: PatternGridSpec) -> np.ndarray:
    """Turn a (frames, n_pixels) word array into 0/1 uint8 pixels."""
    frames, n = words.shape
    if spec.fill_mode is FillMode.BERNOULLI:
        return (rng.to_unit(words) < spec.fill_ratio).astype(np.uint8)
    k = spec.white_count
    out = np.zeros((frames, n), dtype=np.uint8)
    if k == n:
        out[:] = 1
    elif k > 0:
        chosen = np.argpartition(words, k - 1, axis=1)[:, :k]
        np.put_along_axis(out, chosen, 1, axis=1)
    return out


def pattern_block(spec: PatternGridSpec, start: int, stop: int) -> np.ndarray:
    """Frames ``start..stop-1`` as a uint8 array of shape (frames, height, width)."""
    if start < 0 or stop < start:
        raise ValueError(f"invalid frame range [{start}, {stop})")
    words = rng.block_words(spec.seed, rng.PATTERN_STREAM, start, stop, spec.n_pixels)
    return _binarize(words, spec).reshape(stop - start, spec.height, spec.width)


def generate_pattern(spec: PatternGridSpec, index: int) -> SpecklePattern:
    """Return frame ``index`` of the stream described by ``spec``."""
    if index < 0:
        raise ValueError(f"frame index must be >= 0, got {index}")
    return SpecklePattern(int(index), pattern_block(spec, index, index + 1)[0])


def iter_pattern_blocks(
    spec: PatternGridSpec, count: int, block_size: int = DEFAULT_BLOCK, start: int = 0
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(first_index, frames)`` blocks covering ``start..start+count-1``."""
    stop = start + count
    for lo in range(start, stop, block_size):
        hi = min(lo + block_size, stop)
        yield lo, pattern_block(spec, lo, hi)


def pattern_stream(spec: PatternGridSpec, count: int) -> Iterator[SpecklePattern]:
    """Lazily yield frames ``0..count-1``."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    for lo, block in iter_pattern_blocks(spec, count):
        for offset, pixels in enumerate(block):
            yield SpecklePattern(lo + offset, pixels)


# -- pattern file -----------------------------------------------------------
#
#   CGIPAT\n
#   version=1\n
#   width=<int>\n height=<int>\n fill_ratio=<repr float>\n fill_mode=<name>\n
#   seed=<int>\n generator=philox4x64-10\n frames=<int>\n
#   \n                              (blank line ends the header)
#   frames x ceil(width*height/8) bytes: row-major pixels, MSB first,
#   each frame zero-padded to a byte boundary.

MAGIC = b"CGIPAT\n"
FORMAT_VERSION = 1
_HEADER_KEYS = ("width", "height", "fill_ratio", "fill_mode", "seed", "generator", "frames")


@dataclass(frozen=True)
class PatternFile:
    spec: PatternGridSpec
    frames: np.ndarray  # uint8 (count, height, width)
    generator: str = rng.GENERATOR_NAME

    @property
    def count(self) -> int:
        return self.frames.shape[0]


def _frame_bytes(spec: PatternGridSpec) -> int:
    return (spec.n_pixels + 7) // 8


def save_patterns(path, spec: PatternGridSpec, count: int, block_size: int = DEFAULT_BLOCK):
    """Write frames ``0..count-1`` of ``spec`` to ``path``."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    header = [
        f"version={FORMAT_VERSION}",
        f"width={spec.width}",
        f"height={spec.height}",
        f"fill_ratio={spec.fill_ratio!r}",
        f"fill_mode={spec.fill_mode.value}",
        f"seed={spec.seed}",
        f"generator={rng.GENERATOR_NAME}",
        f"frames={count}",
    ]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(("\n".join(header) + "\n\n").encode("ascii"))
        for _, block in iter_pattern_blocks(spec, count, block_size):
            flat = block.reshape(block.shape[0], -1)
            fh.write(np.packbits(flat, axis=1, bitorder="big").tobytes())


def _parse_header(fh, path):
    if fh.read(len(MAGIC)) != MAGIC:
        raise FileFormatError(f"{path}: not a pattern file (bad magic)")
    fields = {}
    while True:
        line = fh.readline()
        if not line:
            raise FileFormatError(f"{path}: header ends before the blank terminator line")
        line = line.decode("ascii", errors="replace").rstrip("\n")
        if line == "":
            break
        key, sep, value = line.partition("=")
        if not sep:
            raise FileFormatError(f"{path}: malformed header line {line!r}")
        fields[key.strip()] = value.strip()
    if fields.get("version") != str(FORMAT_VERSION):
        raise FileFormatError(f"{path}: unsupported version {fields.get('version')!r}")
    missing = [k for k in _HEADER_KEYS if k not in fields]
    if missing:
        raise FileFormatError(f"{path}: header missing {', '.join(missing)}")
    try:
        spec = PatternGridSpec(
            width=int(fields["width"]),
            height=int(fields["height"]),
            fill_ratio=float(fields["fill_ratio"]),
            seed=int(fields["seed"]),
            fill_mode=FillMode(fields["fill_mode"]),
        )
        count = int(fields["frames"])
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: invalid header value ({exc})") from exc
    if count < 1:
        raise FileFormatError(f"{path}: frame count must be >= 1, got {count}")
    return spec, count, fields["generator"]


def load_patterns(path, expected: PatternGridSpec | None = None) -> PatternFile:
    """Read a pattern file; optionally insist that its header matches ``expected``."""
    with open(path, "rb") as fh:
        spec, count, generator = _parse_header(fh, path)
        payload = fh.read()
    if expected is not None and expected != spec:
        raise FileFormatError(f"{path}: header {spec} does not match expected {expected}")
    per_frame = _frame_bytes(spec)
    need = per_frame * count
    if len(payload) < need:
        frame = len(payload) // per_frame
        raise TruncatedFileError(
            f"{path}: truncated in frame {frame} of {count} "
            f"({len(payload)} of {need} payload bytes)",
            frame_index=frame,
        )
    if len(payload) > need:
        raise FileFormatError(f"{path}: {len(payload) - need} trailing bytes after last frame")
    packed = np.frombuffer(payload, dtype=np.uint8).reshape(count, per_frame)
    bits = np.unpackbits(packed, axis=1, count=spec.n_pixels, bitorder="big")
    return PatternFile(spec, bits.reshape(count, spec.height, spec.width), generator)


def pattern_file_size(spec: PatternGridSpec, count: int) -> int:
    """Payload size in bytes, excluding the header."""
    return _frame_bytes(spec) * count

