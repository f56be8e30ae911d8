"""Deterministic, portable random streams.

SplitMix64 supplies the raw 64-bit stream; Gaussians come from a
Box-Muller transform of its uniforms, so every draw is a fixed sequence
of elementary IEEE operations and reproduces exactly for a given seed.
Child streams are derived from (master seed, index) or a text label, one
stream per measurement call.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z: int) -> int:
    """SplitMix64 finalizer: one avalanche pass over a 64-bit word."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """64-bit generator with a golden-ratio increment."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return mix64(self._state)

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform_open(self) -> float:
        """Uniform double in (0, 1] (safe under log)."""
        return ((self.next_u64() >> 11) + 1) * 2.0**-53

    def gaussian_pair(self) -> tuple[float, float]:
        """Two independent standard normals (Box-Muller)."""
        r = math.sqrt(-2.0 * math.log(self.uniform_open()))
        theta = 2.0 * math.pi * self.uniform()
        return r * math.cos(theta), r * math.sin(theta)


def derive_seed(master: int, index: int) -> int:
    """Child-stream rule: mix the master with the (index+1)-th golden multiple."""
    return mix64((master & _MASK) ^ mix64(((index + 1) * _GOLDEN) & _MASK))


def seed_from_label(master: int, label: str) -> int:
    """Seed for a named experiment cell: FNV-1a of the label, mixed with master."""
    h = _FNV_OFFSET
    for byte in label.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK
    return mix64((master & _MASK) ^ h)


def gaussian_vector(seed: int, n: int, dtype=np.float64) -> np.ndarray:
    """n i.i.d. standard normals from the stream ``seed``, cast to dtype."""
    rng = SplitMix64(seed)
    out = np.empty(n, dtype=np.float64)
    i = 0
    while i < n:
        z0, z1 = rng.gaussian_pair()
        out[i] = z0
        if i + 1 < n:
            out[i + 1] = z1
        i += 2
    return np.ascontiguousarray(out, dtype=dtype)


def gaussian_matrix(rows: int, cols: int, seed: int, dtype=np.float64,
                    scale: float = 1.0) -> np.ndarray:
    """rows x cols matrix of i.i.d. N(0, scale^2) entries."""
    flat = gaussian_vector(seed, rows * cols, dtype)
    if scale != 1.0:
        flat = flat * np.dtype(dtype).type(scale)
    return np.ascontiguousarray(flat.reshape(rows, cols))
