"""Image quality: region SNR, ground-truth fidelity and SNR-vs-frames curves.

The SNR used throughout is

    s_bar   = mean(signal region) - mean(background region)
    sigma_n = population variance of the background region
    SNR     = s_bar**2 / sigma_n,   reported in dB as 10*log10(SNR).
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, DimensionError
from .forward import ObjectMap
from .pipeline import Scenario, acquire

__all__ = [
    "RegionMask",
    "SnrReport",
    "ConvergenceCurve",
    "compute_snr",
    "mask_from_object",
    "fidelity",
    "convergence_curve",
    "write_curves_csv",
]


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Disjoint, non-empty boolean masks over one grid."""

    signal: np.ndarray
    background: np.ndarray

    def __post_init__(self):
        signal = np.asarray(self.signal, dtype=bool)
        background = np.asarray(self.background, dtype=bool)
        if signal.ndim != 2 or signal.shape != background.shape:
            raise DimensionError("signal and background masks must be 2-D grids of the same shape")
        if not signal.any():
            raise DegenerateError("signal region is empty")
        if not background.any():
            raise DegenerateError("background region is empty")
        if (signal & background).any():
            raise ValueError("signal and background regions overlap")
        object.__setattr__(self, "signal", signal)
        object.__setattr__(self, "background", background)

    @property
    def shape(self):
        return self.signal.shape

    @classmethod
    def from_coordinates(cls, shape, signal, background) -> "RegionMask":
        """Build from iterables of ``(row, col)`` pairs."""
        masks = []
        for coords in (signal, background):
            m = np.zeros(shape, dtype=bool)
            for r, c in coords:
                if not (0 <= r < shape[0] and 0 <= c < shape[1]):
                    raise ValueError(f"pixel {(r, c)} lies outside the {shape} grid")
                m[r, c] = True
            masks.append(m)
        return cls(*masks)


@dataclass(frozen=True)
class SnrReport:
    s_bar: float
    sigma_n: float
    snr_linear: float
    snr_db: float | None
    n_frames: int | None = None
    status: str = "ok"

    FIELDS = ("n_frames", "s_bar", "sigma_n", "snr_linear", "snr_db", "status")

    def as_row(self) -> list[str]:
        return ["" if v is None else (repr(v) if isinstance(v, float) else str(v))
                for v in (getattr(self, f) for f in self.FIELDS)]

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in zip(self.FIELDS, self.as_row()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.FIELDS)
        writer.writerow(self.as_row())
        return buf.getvalue()


def compute_snr(image, mask: RegionMask, n_frames: int | None = None) -> SnrReport:
    """Region SNR of ``image`` over ``mask``.

    Raises
    ------
    DegenerateError
        If the background has zero variance (SNR infinite or undefined) or a
        masked pixel is undefined (NaN).

    A zero signal difference is not an error: the report carries
    ``snr_linear = 0`` and ``snr_db = None`` with status ``zero_signal``.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.shape != mask.shape:
        raise DimensionError(f"image shape {image.shape} does not match mask shape {mask.shape}")
    sig = image[mask.signal]
    bg = image[mask.background]
    if not (np.all(np.isfinite(sig)) and np.all(np.isfinite(bg))):
        raise DegenerateError("region mask touches undefined pixels")
    bg_mean = bg.mean()
    s_bar = float(sig.mean() - bg_mean)
    sigma_n = float(np.mean((bg - bg_mean) ** 2))
    if s_bar == 0.0:
        return SnrReport(s_bar, sigma_n, 0.0, None, n_frames, "zero_signal")
    if sigma_n == 0.0:
        raise DegenerateError("background variance is zero; SNR is undefined")
    snr = s_bar * s_bar / sigma_n
    return SnrReport(s_bar, sigma_n, snr, 10.0 * math.log10(snr), n_frames)


def mask_from_object(obj: ObjectMap, threshold: float = 0.5) -> RegionMask:
    """Signal where the ground-truth value is at least ``threshold``."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    signal = obj.values >= threshold
    return RegionMask(signal, ~signal)


def fidelity(image, obj: ObjectMap) -> float:
    """Pearson correlation between ``image`` and the object over defined pixels."""
    image = np.asarray(image, dtype=np.float64)
    if image.shape != obj.shape:
        raise DimensionError(f"image shape {image.shape} does not match object shape {obj.shape}")
    ok = np.isfinite(image)
    a = image[ok] - image[ok].mean()
    b = obj.values[ok] - obj.values[ok].mean()
    saa, sbb = float(a @ a), float(b @ b)
    if saa == 0.0 or sbb == 0.0:
        raise DegenerateError("fidelity needs nonzero variance in both image and object")
    return float(np.clip((a @ b) / math.sqrt(saa * sbb), -1.0, 1.0))


@dataclass
class ConvergenceCurve:
    """Mean SNR over seeds at each frame count.

    ``per_seed[i, j]`` is the dB value for ``seeds[i]`` at ``n_grid[j]``.
    """

    n_grid: list[int]
    mean_db: list[float]
    std_db: list[float]
    seeds: list[int]
    scenario_id: str
    per_seed: np.ndarray = field(repr=False, default=None)

    @property
    def points(self) -> list[tuple[int, float]]:
        return list(zip(self.n_grid, self.mean_db))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n_frames", "mean_snr_db", "std_snr_db", "n_seeds"])
        for n, m, s in zip(self.n_grid, self.mean_db, self.std_db):
            writer.writerow([n, repr(m), repr(s), len(self.seeds)])
        return buf.getvalue()


def _seed_curve(scenario: Scenario, n_grid, mask, use_g2, threads):
    acq = acquire(scenario, n_grid[-1], checkpoints=n_grid, threads=threads)
    out = []
    for n in n_grid:
        img = acq.checkpoints[n]
        report = compute_snr(img.g2 if use_g2 else img.fluct, mask, n)
        if report.snr_db is None:
            raise DegenerateError(f"zero signal at n={n}; SNR in dB is undefined")
        out.append(report.snr_db)
    return out


def convergence_curve(
    scenario: Scenario,
    n_grid,
    seeds,
    mask: RegionMask | None = None,
    use_g2: bool = False,
    threads: int = 1,
) -> ConvergenceCurve:
    """SNR against frame count, averaged over seeds.

    Each seed runs one acquisition up to ``max(n_grid)`` and reads the image
    at every grid point from the running accumulator. Seed ``s`` sets both the
    pattern seed and the channel noise seed.
    """
    n_grid = [int(n) for n in n_grid]
    if not n_grid or any(b <= a for a, b in zip(n_grid, n_grid[1:])) or n_grid[0] < 1:
        raise ValueError(f"n_grid must be a non-empty, strictly increasing list of positive counts: {n_grid}")
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("at least one seed is required")
    if mask is None:
        mask = mask_from_object(scenario.object)
    runs = [scenario.reseeded(s) for s in seeds]
    if threads > 1 and len(runs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda sc: _seed_curve(sc, n_grid, mask, use_g2, 1), runs))
    else:
        rows = [_seed_curve(sc, n_grid, mask, use_g2, threads) for sc in runs]
    table = np.array(rows)
    return ConvergenceCurve(
        n_grid,
        table.mean(axis=0).tolist(),
        table.std(axis=0).tolist(),
        seeds,
        scenario.scenario_id,
        table,
    )


def write_curves_csv(path, curves: dict[str, ConvergenceCurve]):
    """Side-by-side curves sharing one frame grid, one column pair per variant."""
    curves = dict(curves)
    grids = {tuple(c.n_grid) for c in curves.values()}
    if len(grids) != 1:
        raise ValueError("curves must share the same n_grid")
    seeds = {len(c.seeds) for c in curves.values()}
    header = ["n_frames"]
    for name in curves:
        header += [f"{name}_mean_snr_db", f"{name}_std_snr_db"]
    header.append("n_seeds")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for j, n in enumerate(next(iter(grids))):
            row = [n]
            for c in curves.values():
                row += [repr(c.mean_db[j]), repr(c.std_db[j])]
            row.append(max(seeds))
            writer.writerow(row)
