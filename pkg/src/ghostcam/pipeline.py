"""Fused acquisition: generate each pattern block once, bucket it, correlate it.

Work is split into fixed block ranges (plus any requested checkpoints). Each
range produces its own accumulator; ranges are merged strictly in frame order,
so the output is the same for any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .forward import (
    ChannelSpec,
    DetectorTrace,
    ObjectMap,
    apply_channel,
    bucket_block,
    simulate_trace,
    trace_fingerprint,
    trace_metadata,
)
from .patterns import DEFAULT_BLOCK, PatternGridSpec, pattern_block
from .reconstruct import CorrelationAccumulator, ReconstructedImage, finalize_g2

__all__ = ["Scenario", "Acquisition", "block_ranges", "acquire", "accumulate_trace"]


@dataclass(frozen=True)
class Scenario:
    """Everything needed to simulate one experiment: patterns, object, channel."""

    patterns: PatternGridSpec
    object: ObjectMap
    channel: ChannelSpec
    scenario_id: str = "custom"

    def reseeded(self, seed: int, noise_seed: int | None = None) -> "Scenario":
        """Same scenario with new pattern and channel seeds (channel defaults to ``seed``)."""
        return Scenario(
            self.patterns.replace(seed=seed),
            self.object,
            self.channel.replace(noise_seed=seed if noise_seed is None else noise_seed),
            self.scenario_id,
        )

    def simulate(self, count: int, threads: int = 1) -> DetectorTrace:
        return simulate_trace(self.patterns, self.object, self.channel, count, threads=threads)


@dataclass
class Acquisition:
    trace: DetectorTrace
    accumulator: CorrelationAccumulator
    checkpoints: dict[int, ReconstructedImage] = field(default_factory=dict)

    def image(self) -> ReconstructedImage:
        return finalize_g2(self.accumulator)


def block_ranges(count: int, block_size: int = DEFAULT_BLOCK, cuts=()) -> list[tuple[int, int]]:
    """Split ``0..count`` at multiples of ``block_size`` and at every cut point."""
    edges = set(range(0, count, block_size)) | {count}
    edges |= {int(c) for c in cuts if 0 < c < count}
    edges = sorted(edges)
    return list(zip(edges[:-1], edges[1:]))


def _run_ranges(work, ranges, threads):
    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            yield from pool.map(work, ranges)
    else:
        for r in ranges:
            yield work(r)


def acquire(
    scenario: Scenario,
    count: int,
    checkpoints=(),
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK,
) -> Acquisition:
    """Simulate and reconstruct ``count`` frames, finalizing at each checkpoint."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    checkpoints = sorted({int(c) for c in checkpoints})
    if checkpoints and (checkpoints[0] < 1 or checkpoints[-1] > count):
        raise ValueError(f"checkpoints must lie in [1, {count}]")
    spec, obj, channel = scenario.patterns, scenario.object, scenario.channel
    fingerprint = trace_fingerprint(spec, obj, channel, count)

    def work(r):
        lo, hi = r
        frames = pattern_block(spec, lo, hi)
        samples = apply_channel(bucket_block(frames, obj), channel, lo)
        part = CorrelationAccumulator(*spec.shape)
        part.ingest_block(frames, samples)
        return hi, samples, part

    acc = CorrelationAccumulator(*spec.shape, fingerprint=fingerprint)
    pieces = []
    snapshots = {}
    wanted = set(checkpoints)
    for hi, samples, part in _run_ranges(work, block_ranges(count, block_size, checkpoints), threads):
        acc.merge_into(part)
        pieces.append(samples)
        if hi in wanted:
            snapshots[hi] = finalize_g2(acc)
    trace = DetectorTrace(
        np.concatenate(pieces), fingerprint, trace_metadata(spec, obj, channel, count)
    )
    return Acquisition(trace, acc, snapshots)


def accumulate_trace(
    spec: PatternGridSpec,
    samples,
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK,
    fingerprint: str = "",
) -> CorrelationAccumulator:
    """Correlate a recorded trace against the regenerated pattern stream."""
    samples = np.asarray(samples, dtype=np.float64).reshape(-1)
    if samples.shape[0] < 1:
        raise ValueError("trace is empty")

    def work(r):
        lo, hi = r
        part = CorrelationAccumulator(*spec.shape)
        part.ingest_block(pattern_block(spec, lo, hi), samples[lo:hi])
        return part

    acc = CorrelationAccumulator(*spec.shape, fingerprint=fingerprint)
    for part in _run_ranges(work, block_ranges(samples.shape[0], block_size), threads):
        acc.merge_into(part)
    return acc
