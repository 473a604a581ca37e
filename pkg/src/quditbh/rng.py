"""Counter-based random number generation.

Every output is a pure function of (seed, counter), so identical seeds give
identical streams on every platform and the stream can be generated in
vectorized blocks without state hand-offs.  The mixer is SplitMix64:

    out(seed, i) = mix64(seed + (i + 1) * 0x9E3779B97F4A7C15)

Uniform doubles take the top 53 bits; normals use Box-Muller on consecutive
counter pairs.  Child streams (for independent trials) reseed with a mix of
the parent seed and the stream index.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = 0xFFFFFFFFFFFFFFFF
_INV_2_53 = float(2.0**-53)


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on a uint64 array (modular arithmetic throughout)."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= _MIX1
    z ^= z >> np.uint64(27)
    z *= _MIX2
    z ^= z >> np.uint64(31)
    return z


def _mix64_int(z: int) -> int:
    # Same finalizer on Python ints (no numpy scalar overflow warnings).
    z &= _U64_MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _U64_MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _U64_MASK
    z ^= z >> 31
    return z


class CounterRng:
    """Deterministic counter-based generator with a 64-bit seed.

    The instance only tracks how many outputs have been consumed; block i of
    the stream never depends on how earlier blocks were sliced.
    """

    def __init__(self, seed: int, counter: int = 0):
        self.seed = np.uint64(int(seed) & _U64_MASK)
        self.counter = int(counter)

    def __repr__(self) -> str:
        return f"CounterRng(seed={int(self.seed):#x}, counter={self.counter})"

    def spawn(self, index: int) -> "CounterRng":
        """Independent child stream for trial/worker `index`."""
        base = (int(self.seed) ^ 0x5851F42D4C957F2D) & _U64_MASK
        key = _mix64_int(base + (int(index) + 1) * 0x9E3779B97F4A7C15)
        return CounterRng(_mix64_int(key + int(self.seed)))

    def raw(self, count: int) -> np.ndarray:
        """Next `count` uint64 outputs."""
        idx = np.arange(self.counter + 1, self.counter + count + 1, dtype=np.uint64)
        self.counter += count
        return mix64(self.seed + idx * _GOLDEN)

    def uniform(self, count: int) -> np.ndarray:
        """Uniform float64 in [0, 1)."""
        return (self.raw(count) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def signs(self, count: int) -> np.ndarray:
        """Uniform +/-1 int8 values (one counter step per sign)."""
        bits = self.raw(count) >> np.uint64(63)
        return (1 - 2 * bits.astype(np.int8)).astype(np.int8)

    def sign_block(self, count: int, width: int) -> np.ndarray:
        """(count, width) array of +/-1 int8, one counter step per row.

        Width is capped at 64 since each row unpacks a single 64-bit output.
        """
        if not 1 <= width <= 64:
            raise ValueError("sign_block width must be in 1..64")
        words = self.raw(count)
        shifts = np.arange(width, dtype=np.uint64)
        bits = ((words[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.int8)
        return (1 - 2 * bits).astype(np.int8)

    def sign_matrix(self, count: int, width: int) -> np.ndarray:
        """(count, width) array of +/-1 int8 for arbitrary width; each row
        consumes ceil(width/64) counter steps."""
        words_per_row = (width + 63) // 64
        raw = self.raw(count * words_per_row).reshape(count, words_per_row)
        out = np.empty((count, width), dtype=np.int8)
        for word in range(words_per_row):
            lo = word * 64
            nbits = min(64, width - lo)
            shifts = np.arange(nbits, dtype=np.uint64)
            bits = ((raw[:, word, None] >> shifts[None, :]) & np.uint64(1)).astype(np.int8)
            out[:, lo : lo + nbits] = 1 - 2 * bits
        return out

    def integers(self, count: int, bound: int) -> np.ndarray:
        """Uniform int64 in [0, bound) (floor of a uniform double; the
        2^-53-level bias is irrelevant at desk scale)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return np.minimum((self.uniform(count) * bound).astype(np.int64), bound - 1)

    def normal(self, count: int) -> np.ndarray:
        """Standard real normals via Box-Muller on counter pairs."""
        pairs = (count + 1) // 2
        u_raw = self.raw(2 * pairs)
        u1 = ((u_raw[:pairs] >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53
        u2 = (u_raw[pairs:] >> np.uint64(11)).astype(np.float64) * _INV_2_53
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:count]

    def complex_normal(self, count: int) -> np.ndarray:
        """Standard complex normals: unit total variance, CN(0, 1)."""
        z = self.normal(2 * count)
        return (z[0::2] + 1j * z[1::2]) / np.sqrt(2.0)
