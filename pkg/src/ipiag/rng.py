"""Deterministic 64-bit pseudo random generator for schedules and data.

The generator is counter based so that scalar and bulk draws interleave
consistently and so that another implementation (in any language) can
reproduce a stream from the seed alone.  Draw number j (1-indexed) is

    out_j = mix((seed + j * 0x9E3779B97F4A7C15) mod 2**64)

with the output mixing function

    mix(z): z ^= z >> 30;  z = (z * 0xBF58476D1CE4E5B9) mod 2**64
            z ^= z >> 27;  z = (z * 0x94D049BB133111EB) mod 2**64
            return z ^ (z >> 31)

Derived draws are defined on top of the 64-bit stream:

* ``below(n)``     -- ``next_u64() % n`` (modulo bias is negligible for the
  small ``n`` used here and keeps the recurrence trivial to port),
* ``uniforms(n)``  -- ``(u >> 11) * 2**-53`` giving doubles in ``[0, 1)``,
* ``normals(n)``   -- Box-Muller on consecutive uniform blocks ``u1 = U[:m]``,
  ``u2 = U[m:]`` producing ``r*cos`` values followed by ``r*sin`` values,
  truncated to ``n``.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * _MIX1 & _MASK
    z = (z ^ (z >> 27)) * _MIX2 & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Counter-based SplitMix64 stream over a 64-bit seed."""

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return _mix((self.seed + self.counter * _GAMMA) & _MASK)

    def below(self, n: int) -> int:
        """Integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def u64_array(self, n: int) -> np.ndarray:
        """Next n raw draws as a uint64 array (same stream as next_u64)."""
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        z = np.uint64(self.seed) + idx * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))

    def uniforms(self, n: int) -> np.ndarray:
        """Doubles in [0, 1) with 53-bit resolution."""
        return (self.u64_array(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normals(self, n: int) -> np.ndarray:
        """Standard normal draws via Box-Muller on uniform blocks."""
        m = (n + 1) // 2
        u = self.uniforms(2 * m)
        u1 = np.maximum(u[:m], 2.0**-53)  # keep log finite
        u2 = u[m:]
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
        return z[:n]

    def shuffle_prefix(self, n: int, k: int) -> np.ndarray:
        """First k entries of a Fisher-Yates shuffle of range(n), sorted."""
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        idx = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return np.array(sorted(idx[:k]), dtype=int)
