"""Deterministic seeded randomness.

One root seed per scenario; every actor derives an independent child
stream by domain-separated hashing, so the scheduler order of draws in
one stream never affects another.
"""

import random

from .keccak import keccak256


class SeededRng:
    """Counter-mode keccak stream over a 32-byte state."""

    def __init__(self, seed):
        if isinstance(seed, int):
            seed = seed.to_bytes(32, "big", signed=False)
        self._state = keccak256(b"anonbridge/rng" + bytes(seed))
        self._counter = 0
        self._buf = b""

    def child(self, label: str) -> "SeededRng":
        """Independent stream derived from this one's seed and a label."""
        return SeededRng(keccak256(self._state + label.encode()))

    def bytes(self, n: int) -> bytes:
        while len(self._buf) < n:
            block = keccak256(self._state + self._counter.to_bytes(8, "big"))
            self._counter += 1
            self._buf += block
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def py_random(self) -> random.Random:
        """Stdlib Random seeded from this stream, for shuffles/choices."""
        return random.Random(int.from_bytes(self.bytes(32), "big"))


def random_field_31(rng: SeededRng) -> int:
    """Uniform 31-byte integer, big-endian; always < 2^248 < P."""
    return int.from_bytes(rng.bytes(31), "big")
