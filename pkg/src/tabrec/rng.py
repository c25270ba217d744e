"""Deterministic 64-bit PRNG for corpus generation.

The stream is xorshift64* (Marsaglia xorshift with the 0x2545F4914F6CDD1D
output multiplier): state updates x ^= x >> 12; x ^= x << 25; x ^= x >> 27,
everything modulo 2**64. Seeds pass through one SplitMix64 step
(gamma 0x9E3779B97F4A7C15, mixers 0xBF58476D1CE4E5B9 / 0x94D049BB133111EB)
so that small or zero user seeds still open a healthy state. Every derived
quantity below is specified exactly so an independent implementation can
reproduce the same corpora from the same seed.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1


def splitmix64(seed: int) -> int:
    z = (seed + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class Xorshift64Star:
    """xorshift64* stream seeded via SplitMix64."""

    def __init__(self, seed: int):
        state = splitmix64(seed & MASK64)
        self.state = state if state != 0 else 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x = (x ^ (x << 25)) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def randint(self, lo: int, hi: int) -> int:
        """Uniform-ish integer in [lo, hi] inclusive: lo + u64 % (hi-lo+1)."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)

    def chance(self, p: float) -> bool:
        """True with probability p: u64 < floor(p * 2**64)."""
        if p <= 0.0:
            return False
        if p >= 1.0:
            return True
        return self.next_u64() < int(p * 2.0 ** 64)

    def uniform(self, lo: float, hi: float) -> float:
        """lo + (u64 / 2**64) * (hi - lo)."""
        return lo + (self.next_u64() / 2.0 ** 64) * (hi - lo)

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]

    def shuffle(self, items: list) -> list:
        """In-place Fisher-Yates, descending index, swap with randint(0, i)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i)
            items[i], items[j] = items[j], items[i]
        return items
