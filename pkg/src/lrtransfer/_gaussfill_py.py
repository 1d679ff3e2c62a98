"""Vectorized numpy backend for the counter-based sampler.

Same contract as the compiled kernel in _gaussfill.pyx: given a stream
key and a starting counter, produce the words mix64(key + (c+1)*GAMMA)
for c = counter, counter+1, ... and derive uniforms / Gaussian pairs
from them.  All integer arithmetic is uint64 with wraparound.
"""

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TWO_PI = 6.283185307179586
_INV_2_53 = 2.0 ** -53


def raw_uint64(key: int, counter: int, n: int) -> np.ndarray:
    """Words counter+1 .. counter+n of the stream with the given key."""
    idx = np.arange(1, n + 1, dtype=np.uint64)
    idx += np.uint64(counter & 0xFFFFFFFFFFFFFFFF)
    x = np.uint64(key) + idx * np.uint64(GAMMA)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_M1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_M2)
    x ^= x >> np.uint64(31)
    return x


def fill_gaussian(key: int, counter: int, n: int):
    """n standard Gaussians via Box-Muller on consecutive word pairs.

    Returns (values, words_consumed); an odd n consumes a full pair and
    discards the second half so counter advancement stays pair-aligned.
    """
    pairs = (n + 1) // 2
    u = raw_uint64(key, counter, 2 * pairs)
    a = u[0::2]
    b = u[1::2]
    # u1 in (0, 1] so the log is finite; u2 in [0, 1).
    u1 = ((a >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53
    u2 = (b >> np.uint64(11)).astype(np.float64) * _INV_2_53
    r = np.sqrt(-2.0 * np.log(u1))
    th = _TWO_PI * u2
    out = np.empty(2 * pairs, dtype=np.float64)
    out[0::2] = r * np.cos(th)
    out[1::2] = r * np.sin(th)
    return out[:n], 2 * pairs
