"""Result containers shared by the curve-producing estimators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class CurveEstimate:
    """Per-grid-point fitted values with convergence bookkeeping.

    A point that failed outright carries ``nan`` in ``values``,
    ``converged=False`` and a non-"ok" entry in ``status``; a point
    that merely hit the iteration budget keeps its last iterate with
    ``converged=False`` and status "max_iter".
    """

    grid: np.ndarray
    values: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    diagnostics: np.ndarray  # final objective value per point (nan for local_poly)
    status: list[str] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.grid)
        for name in ("values", "iterations", "converged", "diagnostics"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length differs from grid length")
        if len(self.status) != n:
            raise ValueError("status length differs from grid length")

    @property
    def n_failed(self) -> int:
        return sum(1 for s in self.status if s not in ("ok", "max_iter"))

    @property
    def all_ok(self) -> bool:
        return self.n_failed == 0 and bool(np.all(self.converged))
