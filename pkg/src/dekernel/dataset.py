"""Ordered (x, y) observations with an explicit response-scale tag."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveData

SCALES = ("linear", "log")


@dataclass
class Dataset:
    """Design points ``x`` (sorted) with responses ``y``.

    ``scale`` records what the y column holds: raw responses
    ("linear") or already-logged responses ("log"). Nothing in the
    library log-transforms silently; conversions go through
    ``working_values``.
    """

    x: np.ndarray
    y: np.ndarray
    scale: str = "linear"

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.ndim != 1 or self.y.ndim != 1:
            raise ValueError("x and y must be one-dimensional")
        if len(self.x) != len(self.y) or len(self.x) < 1:
            raise ValueError("x and y must have equal length >= 1")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise ValueError("x and y must be finite")
        if np.any(np.diff(self.x) < 0.0):
            raise ValueError("x must be sorted non-decreasing")
        if self.scale not in SCALES:
            raise ValueError(f"scale must be one of {SCALES}, got {self.scale!r}")

    def __len__(self) -> int:
        return len(self.x)

    def working_values(self, scale: str) -> np.ndarray:
        """Responses expressed on the requested scale."""
        if scale not in SCALES:
            raise ValueError(f"scale must be one of {SCALES}, got {scale!r}")
        if scale == self.scale:
            return self.y.copy()
        if scale == "log":
            if np.any(self.y <= 0.0):
                raise NonPositiveData("log transform requested but some y <= 0")
            return np.log(self.y)
        return np.exp(self.y)

    def on_scale(self, scale: str) -> "Dataset":
        return Dataset(self.x.copy(), self.working_values(scale), scale)
