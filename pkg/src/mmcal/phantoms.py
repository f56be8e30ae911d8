"""Bundled synthetic test images.

Deterministic closed-form phantoms in [0, 1] stand in for the natural
images that cannot be redistributed; ``sparse_spikes`` provides the
k-sparse vectors used by the recovery checks.
"""

from __future__ import annotations

import numpy as np

from . import rng
from .precision import Precision

__all__ = [
    "ALL_NAMES",
    "PHANTOM_NAMES",
    "PM_TEXTURE_NAMES",
    "phantom",
    "phantom_image",
    "pm_constant",
    "sparse_spikes",
]

PHANTOM_NAMES = ("disk", "rings", "checker", "stripes", "gradient", "blobs", "cross")
# Pre-measurement textures: "haze" decays fast against the bundled images,
# "weave" slowly (low vs high oscillation energy at their gray levels).
PM_TEXTURE_NAMES = ("haze", "weave")
ALL_NAMES = PHANTOM_NAMES + PM_TEXTURE_NAMES


def _grid(h: int, w: int):
    yy = np.arange(h, dtype=np.float64)[:, None] / max(h - 1, 1)
    xx = np.arange(w, dtype=np.float64)[None, :] / max(w - 1, 1)
    return yy, xx


def phantom_image(name: str, h: int = 16, w: int = 16) -> np.ndarray:
    """2-D float64 image in [0, 1]."""
    yy, xx = _grid(h, w)
    r = np.sqrt((yy - 0.5) ** 2 + (xx - 0.5) ** 2)
    if name == "disk":
        img = np.where(r <= 0.32, 0.9, 0.1)
    elif name == "rings":
        img = 0.5 + 0.45 * np.cos(2.0 * np.pi * 3.0 * r)
    elif name == "checker":
        block = max(1, min(h, w) // 4)
        iy = np.arange(h)[:, None] // block
        ix = np.arange(w)[None, :] // block
        img = np.where((iy + ix) % 2 == 0, 0.85, 0.15) * np.ones((h, w))
    elif name == "stripes":
        img = 0.5 + 0.4 * np.sin(2.0 * np.pi * 2.5 * (yy + xx))
    elif name == "gradient":
        img = (yy + xx) / 2.0
    elif name == "blobs":
        centers = ((0.3, 0.25, 0.12), (0.7, 0.6, 0.18), (0.35, 0.8, 0.1))
        img = np.zeros((h, w))
        for cy, cx, s in centers:
            img += np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * s**2))
        img = 0.05 + 0.9 * img / img.max()
    elif name == "cross":
        bar = 0.14
        img = np.where(
            (np.abs(yy - 0.5) <= bar) | (np.abs(xx - 0.5) <= bar), 0.9, 0.1
        ) * np.ones((h, w))
    elif name == "haze":
        img = 0.3 + 0.04 * np.cos(2.0 * np.pi * yy) * np.cos(2.0 * np.pi * xx)
    elif name == "weave":
        iy = np.arange(h)[:, None] // 2
        ix = np.arange(w)[None, :] // 2
        img = np.where((iy + ix) % 2 == 0, 0.95, 0.05) * np.ones((h, w))
    else:
        raise ValueError(f"unknown phantom {name!r}; choose from {ALL_NAMES}")
    return np.clip(img, 0.0, 1.0)


def phantom(name: str, h: int = 16, w: int = 16,
            precision: Precision = Precision.BITS64) -> np.ndarray:
    """Flattened (row-major) phantom as a length h*w vector."""
    return np.ascontiguousarray(phantom_image(name, h, w).reshape(-1), dtype=precision.dtype)


def pm_constant(level: float = 0.5, h: int = 16, w: int = 16,
                precision: Precision = Precision.BITS64) -> np.ndarray:
    """Constant-gray pre-measurement image."""
    if not (0.0 <= level <= 1.0):
        raise ValueError(f"gray level must lie in [0, 1], got {level}")
    return np.full(h * w, level, dtype=precision.dtype)


def sparse_spikes(n: int, k: int, seed: int,
                  precision: Precision = Precision.BITS64) -> np.ndarray:
    """k-sparse vector: k distinct positions with values in [0.5, 1.5]."""
    if not 0 < k <= n:
        raise ValueError(f"need 0 < k <= n, got k={k}, n={n}")
    stream = rng.SplitMix64(seed)
    positions = []
    while len(positions) < k:
        pos = stream.next_u64() % n
        if pos not in positions:
            positions.append(pos)
    x = np.zeros(n, dtype=precision.dtype)
    for pos in positions:
        x[pos] = 0.5 + stream.uniform()
    return x
