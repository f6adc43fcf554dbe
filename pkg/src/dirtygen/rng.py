"""Deterministic pseudorandom substreams addressed by (seed, stage, tuple, attribute).

Every random decision in the pipeline draws from a stream whose entire state
is a pure 64-bit function of its address. Streams with distinct addresses are
independent, so changing one part of a run (say, adding an error spec of a
new type) cannot shift the draws of an unrelated part.

Derivation, documented for reproducibility across platforms:

    h0     = mix64(seed XOR GOLDEN)
    h1     = mix64(h0 XOR blake2b_64(stage))
    h2     = mix64(h1 XOR blake2b_64(attribute))
    key(i) = mix64(h2 XOR (i * GOLDEN mod 2^64))

where mix64 is the SplitMix64 finalizer, GOLDEN = 0x9E3779B97F4A7C15, and
blake2b_64 is the first 8 bytes (big-endian) of BLAKE2b over the UTF-8 label.
A stream then emits SplitMix64 outputs seeded at key(i). All arithmetic is
unsigned 64-bit, so results are identical on every platform.
"""

from __future__ import annotations

import hashlib
import math
from functools import lru_cache

_MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

_TWO53_INV = 1.0 / (1 << 53)


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a fixed, well-mixed permutation of 64-bit ints."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@lru_cache(maxsize=4096)
def _label_hash(label: str) -> int:
    return int.from_bytes(hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest(), "big")


@lru_cache(maxsize=4096)
def stage_key(seed: int, stage: str, attribute: str = "") -> int:
    """Partially applied address: everything except the tuple index."""
    h = mix64((seed & _MASK64) ^ GOLDEN)
    h = mix64(h ^ _label_hash(stage))
    return mix64(h ^ _label_hash(attribute))


def address_key(seed: int, stage: str, tuple_index: int = 0, attribute: str = "") -> int:
    return mix64(stage_key(seed, stage, attribute) ^ ((tuple_index * GOLDEN) & _MASK64))


class Stream:
    """SplitMix64 sequence seeded at a derived address key."""

    __slots__ = ("_state",)

    def __init__(self, key: int) -> None:
        self._state = key & _MASK64

    def u64(self) -> int:
        self._state = (self._state + GOLDEN) & _MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.u64() >> 11) * _TWO53_INV

    def random_open(self) -> float:
        """Uniform float in (0, 1], safe as a log() argument."""
        return ((self.u64() >> 11) + 1) * _TWO53_INV

    def randrange(self, n: int) -> int:
        """Uniform int in [0, n). Multiply-shift; bias is < n / 2^64."""
        if n <= 0:
            raise ValueError("randrange requires n >= 1")
        return (self.u64() * n) >> 64

    def randint(self, a: int, b: int) -> int:
        """Uniform int in [a, b] inclusive."""
        return a + self.randrange(b - a + 1)

    def uniform(self, a: float, b: float) -> float:
        return a + self.random() * (b - a)

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """One Box-Muller draw; consumes exactly two uniforms."""
        u1 = self.random_open()
        u2 = self.random()
        z = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        return mu + sigma * z

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), drawn via partial Fisher-Yates."""
        if k > n:
            raise ValueError("sample larger than population")
        pool = list(range(n))
        for i in range(k):
            j = i + self.randrange(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


def derive_stream(seed: int, stage: str, tuple_index: int = 0, attribute: str = "") -> Stream:
    """The addressed substream for one (stage, tuple, attribute) decision point."""
    return Stream(address_key(seed, stage, tuple_index, attribute))


class IndexPermutation:
    """Seeded bijection of range(size) with O(1) memory and O(1) lookups.

    A four-round Feistel network over the smallest even-bit-width power of
    two >= size, cycle-walking until the image lands inside the domain.
    Used for collision-free unique-value assignment and for exhaustive,
    deterministic target selection in the error planner.
    """

    __slots__ = ("size", "_key", "_half_bits", "_half_mask", "_span")

    def __init__(self, key: int, size: int) -> None:
        if size < 0:
            raise ValueError("size must be non-negative")
        self.size = size
        self._key = key & _MASK64
        bits = max(2, (max(size - 1, 1)).bit_length())
        if bits % 2:
            bits += 1
        self._half_bits = bits // 2
        self._half_mask = (1 << self._half_bits) - 1
        self._span = 1 << bits

    def __call__(self, index: int) -> int:
        if not 0 <= index < self.size:
            raise IndexError(f"index {index} outside permutation domain of size {self.size}")
        x = index
        while True:
            left = x >> self._half_bits
            right = x & self._half_mask
            for rnd in range(4):
                left, right = right, left ^ (
                    mix64(self._key + (right << 3) + rnd) & self._half_mask
                )
            x = (left << self._half_bits) | right
            if x < self.size:
                return x
