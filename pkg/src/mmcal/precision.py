"""Runtime-selectable floating-point precision.

Precision is an experimental variable here, not an implementation detail:
every pipeline runs entirely in its selected width, with no silent
promotion to float64 along the way.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import DimensionError


class Precision(enum.Enum):
    """Working width of a numerical pipeline: 32- or 64-bit IEEE."""

    BITS32 = 32
    BITS64 = 64

    @property
    def dtype(self):
        return np.dtype(np.float32 if self is Precision.BITS32 else np.float64)

    @property
    def eps(self) -> float:
        return float(np.finfo(self.dtype).eps)

    @property
    def denominator_floor(self) -> float:
        """Relative floor below which quadratic-form denominators are degenerate."""
        return 1e-5 if self is Precision.BITS32 else 1e-12

    @classmethod
    def from_dtype(cls, dtype) -> "Precision":
        dtype = np.dtype(dtype)
        if dtype == np.float32:
            return cls.BITS32
        if dtype == np.float64:
            return cls.BITS64
        raise DimensionError(f"unsupported dtype {dtype}; use float32 or float64")

    @classmethod
    def parse(cls, value) -> "Precision":
        """Accept 32/64 as int, str, or an existing Precision."""
        if isinstance(value, Precision):
            return value
        text = str(value).strip()
        if text in ("32", "float32", "f32"):
            return cls.BITS32
        if text in ("64", "float64", "f64"):
            return cls.BITS64
        raise ValueError(f"unknown precision {value!r}; expected 32 or 64")
