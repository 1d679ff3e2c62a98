"""Counter-based random streams.

Every stream is identified by (seed, stream id) and owns a monotonically
increasing counter.  Word k of a stream is mix64(key + (k+1)*GAMMA)
where key is a two-round hash of (seed, stream id) and mix64 is the
SplitMix64 finalizer.  Draws are therefore pure functions of
(seed, stream id, counter): replaying a stream from the same counter
reproduces the same values no matter what other streams did in between,
which is what makes sweep cells independent of execution order.

Gaussians come from Box-Muller on consecutive word pairs.  An odd-sized
request consumes a whole pair so the counter stays pair-aligned.

Backend: the compiled kernel (lrtransfer._gaussfill) is used when the
extension built, else the vectorized numpy fallback.  uint64 streams are
bit-identical across backends; Gaussian floats may differ in the last
couple of ulps because libm and numpy transcendentals round differently.
Set LRTRANSFER_KERNEL=python to force the fallback.

Usage:
    rng = RngStream(seed=7, stream=stream_id("demo"))
    z = rng.gaussians(10)
    child = rng.spawn("trial", 3)   # independent stream, same seed
"""

import hashlib
import os

import numpy as np

from . import _gaussfill_py

_MASK64 = 0xFFFFFFFFFFFFFFFF
GAMMA = 0x9E3779B97F4A7C15

if os.environ.get("LRTRANSFER_KERNEL", "") == "python":
    _kernel = _gaussfill_py
    BACKEND = "python"
else:
    try:
        from . import _gaussfill as _kernel

        BACKEND = "compiled"
    except ImportError:
        _kernel = _gaussfill_py
        BACKEND = "python"


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int) -> int:
    h = mix64((seed + GAMMA) & _MASK64)
    return mix64((h + stream) & _MASK64)


def stream_id(*parts) -> int:
    """Stable 64-bit stream id from a tuple of ints/strings.

    Hash-based so callers can derive ids from structured labels
    (experiment name, parametrization, width, depth, seed index)
    without coordinating a global registry.
    """
    enc = "\x1f".join(f"{type(p).__name__}:{p}" for p in parts)
    digest = hashlib.blake2b(enc.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RngStream:
    """A named, replayable stream of uint64 words / uniforms / Gaussians."""

    __slots__ = ("seed", "stream", "counter", "_key")

    def __init__(self, seed: int = 0, stream: int = 0, counter: int = 0):
        self.seed = int(seed)
        self.stream = int(stream) & _MASK64
        self.counter = int(counter)
        self._key = stream_key(self.seed, self.stream)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream:#x}, counter={self.counter})"

    def clone(self) -> "RngStream":
        return RngStream(self.seed, self.stream, self.counter)

    def spawn(self, *parts) -> "RngStream":
        """Independent child stream; id mixes the parent id with parts."""
        return RngStream(self.seed, stream_id(self.stream, *parts))

    def uint64(self, n: int) -> np.ndarray:
        n = int(n)
        if n < 0:
            raise ValueError("n must be non-negative")
        out = _kernel.raw_uint64(self._key, self.counter, n)
        self.counter += n
        return out

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles in [0, 1) with 53 random bits each."""
        words = self.uint64(n)
        return (words >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)

    def gaussians(self, n: int, std: float = 1.0) -> np.ndarray:
        n = int(n)
        if n < 0:
            raise ValueError("n must be non-negative")
        if std < 0:
            raise ValueError("std must be non-negative")
        out, used = _kernel.fill_gaussian(self._key, self.counter, n)
        self.counter += used
        if std != 1.0:
            out = out * std
        return out
