"""Counter-based, splittable random streams.

Streams wrap numpy's Philox4x64 bit generator. The 128-bit Philox key is
derived from a 64-bit seed and an optional label path with BLAKE2b, so a
stream is fully determined by ``(seed, labels)`` and child streams with
different labels are independent.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

MASK64 = (1 << 64) - 1


def _key_for(seed: int, labels: tuple[str, ...]) -> np.ndarray:
    h = hashlib.blake2b(digest_size=16, person=b"plankit-rng")
    h.update(struct.pack("<Q", seed & MASK64))
    for label in labels:
        data = label.encode("utf-8")
        h.update(struct.pack("<Q", len(data)))
        h.update(data)
    return np.frombuffer(h.digest(), dtype="<u8").astype(np.uint64)


def derive_seed(seed: int, *labels: object) -> int:
    """Deterministically mix ``labels`` into a new 64-bit seed."""
    key = _key_for(seed, tuple(str(x) for x in labels))
    return int(key[0])


class RngStream:
    """A single-owner random stream. Never share one between workers; use
    :meth:`split` to give each worker its own."""

    __slots__ = ("seed", "labels", "_gen")

    def __init__(self, seed: int, labels: tuple[str, ...] = ()):
        if not 0 <= int(seed) <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.labels = tuple(labels)
        self._gen = np.random.Generator(np.random.Philox(key=_key_for(self.seed, self.labels)))

    def split(self, label: str) -> "RngStream":
        return RngStream(self.seed, self.labels + (str(label),))

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return float(self._gen.random())

    def uniform(self, low, high):
        return self._gen.uniform(low, high)

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def integers(self, n: int) -> int:
        """Uniform integer in ``{0, ..., n-1}``."""
        return int(self._gen.integers(0, n))

    def uint64(self) -> int:
        return int(self._gen.integers(0, MASK64, dtype=np.uint64, endpoint=True))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, labels={self.labels!r})"
