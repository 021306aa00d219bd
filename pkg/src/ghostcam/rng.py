"""Counter-based random words keyed by (seed, stream, frame index).

Every frame owns a disjoint region of a Philox4x64-10 counter space, so the
words for frame ``k`` never depend on how many frames were drawn before it.
Conversions from raw words to floats are done here rather than through
``numpy.random.Generator`` so the mapping stays fixed across numpy releases.
"""

import numpy as np

GENERATOR_NAME = "philox4x64-10"

# Second key word; keeps the pattern and channel streams disjoint even when the
# user passes the same integer for both seeds.
PATTERN_STREAM = 0x50415454
NOISE_STREAM = 0x4E4F4953

_MASK64 = (1 << 64) - 1


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def frame_words(seed, stream, index, n):
    """Return ``n`` raw uint64 words for one frame."""
    bitgen = np.random.Philox(
        key=np.array([seed, stream], dtype=np.uint64),
        counter=np.array([0, 0, index, 0], dtype=np.uint64),
    )
    return bitgen.random_raw(n)


def block_words(seed, stream, start, stop, n):
    """Stack ``frame_words`` for frames ``start..stop-1`` into a (frames, n) array."""
    out = np.empty((stop - start, n), dtype=np.uint64)
    for row, index in enumerate(range(start, stop)):
        out[row] = frame_words(seed, stream, index, n)
    return out


def to_unit(words):
    """Map uint64 words to doubles in [0, 1) using their top 53 bits."""
    return (words >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def to_normal_pairs(w1, w2):
    """Box-Muller transform of two word arrays into two standard normal arrays."""
    u1 = 1.0 - to_unit(w1)  # (0, 1], keeps log finite
    u2 = to_unit(w2)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    return radius * np.cos(angle), radius * np.sin(angle)
