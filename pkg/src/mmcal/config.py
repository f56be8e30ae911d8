"""Experiment configuration with a lossless JSON file representation."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import phantoms
from .precision import Precision

__all__ = ["ExperimentConfig", "PMImage", "DEFAULT_SEED"]

DEFAULT_SEED = 20240901


@dataclass(frozen=True)
class PMImage:
    """Pre-measurement image spec: constant gray, bundled phantom, or file."""

    kind: str  # "constant" | "phantom" | "file"
    level: float = 0.5
    name: str = ""
    path: str = ""

    @classmethod
    def parse(cls, text: str) -> "PMImage":
        """Accept "constant:0.5", "phantom:gradient", or "file:img.pgm"."""
        kind, _, arg = text.partition(":")
        kind = kind.strip().lower()
        if kind == "constant":
            return cls(kind="constant", level=float(arg) if arg else 0.5)
        if kind == "phantom":
            if arg not in phantoms.ALL_NAMES:
                raise ValueError(f"unknown phantom {arg!r}; choose from {phantoms.ALL_NAMES}")
            return cls(kind="phantom", name=arg)
        if kind == "file":
            if not arg:
                raise ValueError("file PM spec needs a path, e.g. file:pm.pgm")
            return cls(kind="file", path=arg)
        raise ValueError(f"unknown PM kind {kind!r}; use constant:, phantom:, or file:")

    def spec(self) -> str:
        if self.kind == "constant":
            return f"constant:{self.level!r}"
        if self.kind == "phantom":
            return f"phantom:{self.name}"
        return f"file:{self.path}"

    def render(self, h: int, w: int, precision: Precision) -> np.ndarray:
        from . import io as mio

        if self.kind == "constant":
            return phantoms.pm_constant(self.level, h, w, precision)
        if self.kind == "phantom":
            return phantoms.phantom(self.name, h, w, precision)
        img = mio.read_pgm(self.path)
        if img.shape != (h, w):
            raise ValueError(f"PM image {self.path} is {img.shape}, expected {(h, w)}")
        return np.ascontiguousarray(img.reshape(-1), dtype=precision.dtype)


@dataclass(frozen=True)
class ExperimentConfig:
    """Desk-scale experiment parameters; round-trips losslessly via JSON."""

    m: int = 120
    n: int = 256
    h: int = 16
    w: int = 16
    sigma_noise: float = 0.0
    seed: int = DEFAULT_SEED
    epochs: int = 200
    pm: PMImage = field(default_factory=lambda: PMImage(kind="constant", level=0.5))
    precision: Precision = Precision.BITS64
    output_dir: str = "out"

    def __post_init__(self):
        for name in ("m", "n", "h", "w", "epochs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.h * self.w != self.n:
            raise ValueError(f"h*w must equal n, got {self.h}*{self.w} != {self.n}")
        if self.m >= self.n:
            raise ValueError(f"compressed sensing regime needs m < n, got m={self.m}, n={self.n}")
        if self.sigma_noise < 0:
            raise ValueError(f"sigma_noise must be >= 0, got {self.sigma_noise}")

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["pm"] = self.pm.spec()
        d["precision"] = self.precision.value
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "pm" in d and isinstance(d["pm"], str):
            d["pm"] = PMImage.parse(d["pm"])
        if "precision" in d:
            d["precision"] = Precision.parse(d["precision"])
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    def save(self, path) -> None:
        from .io import atomic_write_text

        atomic_write_text(path, json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def override(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **kwargs)
