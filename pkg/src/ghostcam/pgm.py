"""8-bit binary portable graymap (P5) reading and writing."""

import numpy as np

from .errors import FileFormatError


def _tokens(data, path):
    """Parse the four header tokens; return them and the payload offset."""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FileFormatError(f"{path}: incomplete PGM header")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    return tokens, pos + 1


def read_pgm(path):
    """Return the raster of a P5 file with maxval <= 255 as a uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P5":
        raise FileFormatError(f"{path}: unsupported format (expected binary P5 graymap)")
    (magic, w, h, maxval), offset = _tokens(data, path)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise FileFormatError(f"{path}: non-numeric PGM header field") from exc
    if width < 1 or height < 1:
        raise FileFormatError(f"{path}: invalid size {width}x{height}")
    if not 0 < maxval <= 255:
        raise FileFormatError(f"{path}: only 8-bit graymaps are supported (maxval={maxval})")
    raster = data[offset : offset + width * height]
    if len(raster) < width * height:
        raise FileFormatError(f"{path}: raster truncated")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()
    if pixels.max(initial=0) > maxval:
        raise FileFormatError(f"{path}: pixel value exceeds maxval {maxval}")
    return pixels, maxval


def write_pgm(path, pixels, maxval=255):
    pixels = np.asarray(pixels)
    if pixels.ndim != 2:
        raise ValueError("graymap must be two-dimensional")
    if pixels.dtype != np.uint8:
        if pixels.min(initial=0) < 0 or pixels.max(initial=0) > 255:
            raise ValueError("pixel values must lie in [0, 255]")
        pixels = pixels.astype(np.uint8)
    height, width = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(pixels).tobytes())
