"""Double-double arithmetic on numpy arrays.

A value is carried as an unevaluated pair ``hi + lo`` with ``|lo| <= ulp(hi)/2``.
Only the handful of error-free transforms the accumulator needs live here.
"""

import numpy as np

_SPLIT = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def renorm(hi, lo):
    s = hi + lo
    return s, lo - (s - hi)


def _split(a):
    t = _SPLIT * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    return renorm(s, e + (al + bl))


def dd_scale(ah, al, c):
    """``(ah + al) * c`` for a plain float (array) ``c``."""
    p, e = two_prod(ah, c)
    return renorm(p, e + al * c)


def pairwise_sum(x):
    """Compensated sum over axis 0, returned as ``(hi, lo)``.

    Halves are combined with :func:`two_sum` level by level, so the error of
    the result is of order ``eps**2 * sum(|x|)`` rather than ``eps * sum(|x|)``.
    """
    hi = np.asarray(x, dtype=np.float64)
    if hi.shape[0] == 0:
        z = np.zeros(hi.shape[1:])
        return z, z.copy()
    lo = np.zeros_like(hi)
    while hi.shape[0] > 1:
        m = hi.shape[0] // 2
        s, e = two_sum(hi[:m], hi[m : 2 * m])
        e += lo[:m]
        e += lo[m : 2 * m]
        if hi.shape[0] % 2:
            s = np.concatenate([s, hi[-1:]])
            e = np.concatenate([e, lo[-1:]])
        hi, lo = s, e
    return renorm(hi[0], lo[0])
