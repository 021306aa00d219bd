"""Streaming second-order correlation reconstruction.

A :class:`CorrelationAccumulator` keeps the five running sums that determine
both the normalized correlation image

    g2(x, y) = <I(x, y) S> / (<I(x, y)> <S>)

and the fluctuation image

    fluct(x, y) = <dI(x, y) dS> = <I S> - <I><S>,

where ``I`` is the pattern and ``S`` the bucket sample. Pattern sums are
exact integers. Sample sums are kept in compensated (double-double) form, so
chunking, merging and reordering change them only at the 1e-30 level and the
cancellation in ``<I S> - <I><S>`` costs no precision even where the
fluctuation image is close to zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import pgm
from ._compensated import dd_add, dd_scale, pairwise_sum, two_sum
from .errors import DegenerateError, DimensionError, FileFormatError
from .patterns import SpecklePattern

__all__ = [
    "CorrelationAccumulator",
    "ReconstructedImage",
    "DisplayImage",
    "merge",
    "finalize_g2",
    "finalize_fluctuation_image",
    "normalize_for_display",
    "write_image_csv",
    "read_image_csv",
    "write_display_pgm",
]

SNAPSHOT_FORMAT = "ghostcam-accumulator-v1"


class CorrelationAccumulator:
    """Mergeable one-pass sums over (pattern, sample) pairs.

    Single writer. Parallel reconstruction partitions frames over independent
    accumulators and combines them with :meth:`merge`.
    """

    def __init__(self, height: int, width: int, fingerprint: str = ""):
        if height < 1 or width < 1:
            raise ValueError(f"grid must be at least 1x1, got {height}x{width}")
        self.shape = (int(height), int(width))
        self.n = 0
        self.sum_det = 0.0
        self.sum_det_sq = 0.0
        self.sum_pat = np.zeros(self.shape)
        self.sum_cross = np.zeros(self.shape)
        # low-order halves of the compensated sums
        self.sum_det_lo = 0.0
        self.sum_det_sq_lo = 0.0
        self.sum_cross_lo = np.zeros(self.shape)
        self.fingerprint = fingerprint

    @property
    def height(self) -> int:
        return self.shape[0]

    @property
    def width(self) -> int:
        return self.shape[1]

    def _check(self, shape):
        if tuple(shape) != self.shape:
            raise DimensionError(f"grid {tuple(shape)} does not match accumulator grid {self.shape}")

    def ingest(self, pattern, sample: float) -> "CorrelationAccumulator":
        """Add one frame in place and return ``self``."""
        pixels = pattern.pixels if isinstance(pattern, SpecklePattern) else np.asarray(pattern)
        self._check(pixels.shape)
        sample = float(sample)
        self.n += 1
        self._add_det(sample, 0.0, sample * sample, 0.0)
        self.sum_pat += pixels
        self.sum_cross, self.sum_cross_lo = dd_add(self.sum_cross, self.sum_cross_lo, pixels * sample, 0.0)
        return self

    def _add_det(self, h, l, hq, lq):
        self.sum_det, self.sum_det_lo = (float(v) for v in dd_add(self.sum_det, self.sum_det_lo, h, l))
        self.sum_det_sq, self.sum_det_sq_lo = (float(v) for v in dd_add(self.sum_det_sq, self.sum_det_sq_lo, hq, lq))

    def ingest_block(self, frames: np.ndarray, samples) -> "CorrelationAccumulator":
        """Add a (frames, height, width) block with its samples in place."""
        frames = np.asarray(frames)
        samples = np.asarray(samples, dtype=np.float64).reshape(-1)
        self._check(frames.shape[1:])
        if frames.shape[0] != samples.shape[0]:
            raise DimensionError(f"{frames.shape[0]} frames but {samples.shape[0]} samples")
        if samples.shape[0] == 0:
            return self
        self.n += samples.shape[0]
        self._add_det(*pairwise_sum(samples), *pairwise_sum(samples * samples))
        self.sum_pat += frames.sum(axis=0, dtype=np.float64)
        # binary frames make each product exact; only the summation rounds
        products = frames * samples[:, None, None]
        self.sum_cross, self.sum_cross_lo = dd_add(self.sum_cross, self.sum_cross_lo, *pairwise_sum(products))
        return self

    def copy(self) -> "CorrelationAccumulator":
        out = CorrelationAccumulator(*self.shape, fingerprint=self.fingerprint)
        out.n = self.n
        out.sum_det = self.sum_det
        out.sum_det_sq = self.sum_det_sq
        out.sum_pat = self.sum_pat.copy()
        out.sum_cross = self.sum_cross.copy()
        out.sum_det_lo = self.sum_det_lo
        out.sum_det_sq_lo = self.sum_det_sq_lo
        out.sum_cross_lo = self.sum_cross_lo.copy()
        return out

    def merge(self, other: "CorrelationAccumulator") -> "CorrelationAccumulator":
        """Return a new accumulator holding the fieldwise sums of both."""
        self._check(other.shape)
        out = self.copy()
        out.merge_into(other)
        if not out.fingerprint:
            out.fingerprint = other.fingerprint
        return out

    def merge_into(self, other: "CorrelationAccumulator") -> "CorrelationAccumulator":
        self._check(other.shape)
        self.n += other.n
        self._add_det(other.sum_det, other.sum_det_lo, other.sum_det_sq, other.sum_det_sq_lo)
        self.sum_pat += other.sum_pat
        self.sum_cross, self.sum_cross_lo = dd_add(self.sum_cross, self.sum_cross_lo, other.sum_cross, other.sum_cross_lo)
        return self

    def fields_equal(self, other: "CorrelationAccumulator") -> bool:
        return (
            self.shape == other.shape
            and self.n == other.n
            and self.sum_det == other.sum_det
            and self.sum_det_sq == other.sum_det_sq
            and np.array_equal(self.sum_pat, other.sum_pat)
            and np.array_equal(self.sum_cross, other.sum_cross)
            and self.sum_det_lo == other.sum_det_lo
            and self.sum_det_sq_lo == other.sum_det_sq_lo
            and np.array_equal(self.sum_cross_lo, other.sum_cross_lo)
        )

    def save(self, path):
        """Snapshot for resumable runs (``.npz`` with the keys listed below)."""
        with open(path, "wb") as fh:
            np.savez(
                fh,
                format=np.array(SNAPSHOT_FORMAT),
                shape=np.array(self.shape, dtype=np.int64),
                n=np.array(self.n, dtype=np.int64),
                sum_det=np.array(self.sum_det),
                sum_det_sq=np.array(self.sum_det_sq),
                sum_pat=self.sum_pat,
                sum_cross=self.sum_cross,
                sum_det_lo=np.array(self.sum_det_lo),
                sum_det_sq_lo=np.array(self.sum_det_sq_lo),
                sum_cross_lo=self.sum_cross_lo,
                fingerprint=np.array(self.fingerprint),
            )

    @classmethod
    def load(cls, path) -> "CorrelationAccumulator":
        try:
            with np.load(path, allow_pickle=False) as data:
                if str(data["format"]) != SNAPSHOT_FORMAT:
                    raise FileFormatError(f"{path}: not an accumulator snapshot")
                acc = cls(*(int(v) for v in data["shape"]), fingerprint=str(data["fingerprint"]))
                acc.n = int(data["n"])
                acc.sum_det = float(data["sum_det"])
                acc.sum_det_sq = float(data["sum_det_sq"])
                acc.sum_pat = np.array(data["sum_pat"], dtype=np.float64)
                acc.sum_cross = np.array(data["sum_cross"], dtype=np.float64)
                acc.sum_det_lo = float(data["sum_det_lo"])
                acc.sum_det_sq_lo = float(data["sum_det_sq_lo"])
                acc.sum_cross_lo = np.array(data["sum_cross_lo"], dtype=np.float64)
        except (KeyError, ValueError) as exc:
            raise FileFormatError(f"{path}: malformed accumulator snapshot ({exc})") from exc
        if any(a.shape != acc.shape for a in (acc.sum_pat, acc.sum_cross, acc.sum_cross_lo)):
            raise FileFormatError(f"{path}: sum arrays do not match the stored grid")
        return acc

    def __repr__(self):
        return f"CorrelationAccumulator(shape={self.shape}, n={self.n})"


def merge(a: CorrelationAccumulator, b: CorrelationAccumulator) -> CorrelationAccumulator:
    return a.merge(b)


@dataclass(frozen=True)
class ReconstructedImage:
    """Finalized correlation images.

    ``g2`` is NaN where it is undefined (pixel never lit or zero total signal);
    ``defined`` marks the remaining pixels. ``fluct`` is defined everywhere.
    """

    g2: np.ndarray
    fluct: np.ndarray
    mean_pat: np.ndarray
    mean_det: float
    n: int
    provenance: str = ""

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.g2)

    @property
    def n_undefined(self) -> int:
        return int(np.isnan(self.g2).sum())


def finalize_fluctuation_image(acc: CorrelationAccumulator) -> np.ndarray:
    """Per-pixel covariance between illumination and bucket signal."""
    if acc.n < 1:
        raise DegenerateError("cannot finalize an empty accumulator")
    n = float(acc.n)
    # n*Sxy - Sx*Sy in double-double; the difference is rounded once
    ph, pl = dd_scale(acc.sum_cross, acc.sum_cross_lo, n)
    qh, ql = dd_scale(np.full(acc.shape, acc.sum_det), np.full(acc.shape, acc.sum_det_lo), acc.sum_pat)
    s, e = two_sum(ph, -qh)
    return (s + (e + (pl - ql))) / (n * n)


def finalize_g2(acc: CorrelationAccumulator) -> ReconstructedImage:
    """Normalized correlation and fluctuation images from the sums in ``acc``."""
    fluct = finalize_fluctuation_image(acc)
    n = float(acc.n)
    mean_pat = acc.sum_pat / n
    mean_det = acc.sum_det / n
    denom = acc.sum_pat * acc.sum_det
    g2 = np.full(acc.shape, np.nan)
    ok = denom != 0
    g2[ok] = n * acc.sum_cross[ok] / denom[ok]
    return ReconstructedImage(g2, fluct, mean_pat, mean_det, acc.n, acc.fingerprint)


@dataclass(frozen=True)
class DisplayImage:
    pixels: np.ndarray  # uint8
    n_undefined: int


def normalize_for_display(image) -> DisplayImage:
    """Affinely stretch defined values onto 0..255; NaN pixels render as 0."""
    image = np.asarray(image, dtype=np.float64)
    defined = np.isfinite(image)
    if not defined.any():
        raise DegenerateError("image has no defined pixels")
    lo = image[defined].min()
    hi = image[defined].max()
    out = np.zeros(image.shape, dtype=np.uint8)
    if hi == lo:
        out[defined] = 128
    else:
        out[defined] = np.rint((image[defined] - lo) / (hi - lo) * 255.0).astype(np.uint8)
    return DisplayImage(out, int((~defined).sum()))


def write_display_pgm(path, image) -> DisplayImage:
    display = normalize_for_display(image)
    pgm.write_pgm(path, display.pixels)
    return display


def write_image_csv(path, image):
    """One CSV line per image row, values in ``repr`` form, ``nan`` when undefined."""
    image = np.asarray(image, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in image.tolist():
            writer.writerow([repr(v) for v in row])


def read_image_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    if not rows or len({len(r) for r in rows}) != 1:
        raise FileFormatError(f"{path}: image CSV must be a non-empty rectangular grid")
    return np.array(rows)
