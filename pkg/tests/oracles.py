"""Independent reference computations used by several test modules."""

import itertools
from fractions import Fraction

import numpy as np


def all_binary_patterns(height, width):
    """Every 0/1 grid of the given size, as integer arrays."""
    for bits in itertools.product((0, 1), repeat=height * width):
        yield np.array(bits, dtype=np.int64).reshape(height, width)


def exact_correlation(patterns, samples):
    """Ensemble averages in exact rationals: (g2, fluct) as nested lists of Fractions.

    g2 entries are None where <I(x)> or <S> is zero.
    """
    patterns = [p.tolist() for p in patterns]
    samples = [Fraction(s) for s in samples]
    n = len(samples)
    h, w = len(patterns[0]), len(patterns[0][0])
    mean_s = sum(samples) / n
    g2 = [[None] * w for _ in range(h)]
    fluct = [[None] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            mean_i = Fraction(sum(p[y][x] for p in patterns), n)
            mean_is = sum(p[y][x] * s for p, s in zip(patterns, samples)) / n
            fluct[y][x] = mean_is - mean_i * mean_s
            if mean_i != 0 and mean_s != 0:
                g2[y][x] = mean_is / (mean_i * mean_s)
    return g2, fluct


def exact_bucket(pattern, values):
    return sum(Fraction(int(p)) * Fraction(float(v)) for p, v in zip(np.ravel(pattern), np.ravel(values)))
