"""Growth-law-constrained local estimation.

At each evaluation point the degree-k Taylor polynomial of the mean
function is rewritten through the growth law, leaving the level g(x)
(or G(x) on the log scale) as the single unknown of a weighted
nonlinear least-squares problem. Gauss-Newton with step halving does
the minimizing; a grid + golden-section search over the exact same
objective serves as the independent verification path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _backend
from ._corepy import _kernel_values
from .dataset import Dataset
from .errors import (
    DegreeOutOfRange,
    EmptyBracket,
    EmptyGrid,
    DegenerateDenominator,
    InsufficientLocalData,
    IterateLeftDomain,
    NonPositiveBandwidth,
    WrongAlpha,
)
from .growth import MAX_TAYLOR_DEGREE, QuasiExpModel
from .kernels import KernelSpec
from .results import CurveEstimate

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GaussNewtonOptions:
    max_iter: int = 100
    rel_tol: float = 1e-10
    max_halvings: int = 30

    def __post_init__(self):
        if self.max_iter < 1 or self.max_halvings < 0:
            raise ValueError("iteration budgets must be positive")
        if self.rel_tol <= 0.0:
            raise ValueError("rel_tol must be > 0")


@dataclass(frozen=True)
class FitRequest:
    """Everything one growth-constrained fit needs besides the data."""

    model: QuasiExpModel
    degree_k: int = 1
    kernel: KernelSpec = field(default_factory=KernelSpec)
    bandwidth_h: float = 1.0
    scale: str = "log"
    gauss_newton: GaussNewtonOptions = field(default_factory=GaussNewtonOptions)

    def __post_init__(self):
        if not 1 <= self.degree_k <= MAX_TAYLOR_DEGREE:
            raise DegreeOutOfRange(
                f"degree_k must be in [1, {MAX_TAYLOR_DEGREE}], got {self.degree_k}"
            )
        if self.bandwidth_h <= 0.0:
            raise NonPositiveBandwidth(f"bandwidth must be > 0, got {self.bandwidth_h}")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"scale must be 'linear' or 'log', got {self.scale!r}")


class DEFitResult(NamedTuple):
    estimate: float
    iterations: int
    converged: bool


class _FullFit(NamedTuple):
    estimate: float
    iterations: int
    converged: bool
    objective: float
    n_eff: int
    status: str


def _fit_arrays(x, z, x0, req: FitRequest, warm_start=None) -> _FullFit:
    opts = req.gauss_newton
    est, iters, conv, obj, n_eff, status = _backend.de_fit_point(
        np.ascontiguousarray(x, dtype=float),
        np.ascontiguousarray(z, dtype=float),
        float(x0),
        req.kernel.backend_id,
        float(req.bandwidth_h),
        req.model.alpha,
        req.model.lam,
        int(req.degree_k),
        req.scale == "log",
        float(warm_start) if warm_start is not None else 0.0,
        warm_start is not None,
        opts.max_iter,
        opts.rel_tol,
        opts.max_halvings,
    )
    names = {
        _backend.STATUS_OK: "ok",
        _backend.STATUS_MAX_ITER: "max_iter",
        _backend.STATUS_NO_DATA: "insufficient_data",
        _backend.STATUS_LEFT_DOMAIN: "left_domain",
    }
    return _FullFit(est, iters, conv, obj, n_eff, names[status])


def de_fit_at(data: Dataset, x0: float, req: FitRequest, warm_start=None) -> DEFitResult:
    """Growth-constrained estimate of g(x0) (or G(x0) for log scale).

    Warm start defaults to the local constant estimate; pass
    ``warm_start`` to override. Non-convergence is reported through the
    ``converged`` flag, not an exception.
    """
    z = data.working_values(req.scale)
    full = _fit_arrays(data.x, z, x0, req, warm_start)
    if full.status == "insufficient_data":
        raise InsufficientLocalData(f"no positively weighted design point near x0={x0}")
    if full.status == "left_domain":
        raise IterateLeftDomain(
            f"linear-scale iterate at x0={x0} forced to a non-positive value"
        )
    return DEFitResult(full.estimate, full.iterations, full.converged)


def de_fit_closed_form_exp(data: Dataset, x0: float, req: FitRequest) -> float:
    """Closed-form solution for the purely exponential case alpha = 1.

    With alpha = 1 the predictor is linear in the unknown level, so the
    weighted least-squares minimizer is an explicit ratio. Verification
    oracle for the Gauss-Newton path.
    """
    if req.model.alpha != 1.0:
        raise WrongAlpha(f"closed form needs alpha == 1, got {req.model.alpha}")
    if req.scale != "linear":
        raise ValueError("closed form is defined for the linear scale")
    z = data.working_values("linear")
    dx = data.x - x0
    w = _kernel_values(dx / req.bandwidth_h, req.kernel.backend_id) / req.bandwidth_h
    mask = w > 0.0
    if not np.any(mask):
        raise InsufficientLocalData(f"no positively weighted design point near x0={x0}")
    dxm, zm, wm = dx[mask], z[mask], w[mask]
    c = np.zeros_like(dxm)
    for p in range(req.degree_k + 1):
        c += (req.model.lam * dxm) ** p / math.factorial(p)
    den = float(np.dot(wm, c * c))
    if den == 0.0:
        raise DegenerateDenominator("sum of weighted squared predictors is zero")
    return float(np.dot(wm, zm * c) / den)


def _objective_factory(data: Dataset, x0: float, req: FitRequest):
    """Exact local objective as a vectorized function of candidate levels.

    Built directly from the Taylor/growth-law formula; shared by the
    grid oracle but not by the Gauss-Newton backend.
    """
    z = data.working_values(req.scale)
    dx = data.x - x0
    w = _kernel_values(dx / req.bandwidth_h, req.kernel.backend_id) / req.bandwidth_h
    mask = w > 0.0
    if not np.any(mask):
        raise InsufficientLocalData(f"no positively weighted design point near x0={x0}")
    dxm, zm, wm = dx[mask], z[mask], w[mask]
    alpha, lam, k = req.model.alpha, req.model.lam, req.degree_k
    dx_pows = dxm[:, None] ** np.arange(1, k + 1)[None, :]
    log_scale = req.scale == "log"

    def objective(a_vals):
        a = np.atleast_1d(np.asarray(a_vals, dtype=float))
        terms = np.empty((a.size, k))
        shift = 1.0
        for p in range(1, k + 1):
            if log_scale:
                terms[:, p - 1] = lam ** p * shift / p * np.exp(p * (alpha - 1.0) * a)
                shift *= alpha - 1.0
            else:
                prod = 1.0
                for l in range(1, p + 1):
                    prod *= (l - 1) * alpha - (l - 2)
                with np.errstate(invalid="ignore"):
                    terms[:, p - 1] = (
                        lam ** p * prod / math.factorial(p)
                        * np.power(a, p * alpha - (p - 1.0))
                    )
        pred = a[None, :] + dx_pows @ terms.T
        resid = zm[:, None] - pred
        obj = wm @ (resid * resid)
        if not log_scale:
            obj = np.where(a > 0.0, obj, np.inf)
        return obj if np.ndim(a_vals) else float(obj[0])

    return objective


def de_fit_grid_oracle(
    data: Dataset,
    x0: float,
    req: FitRequest,
    lo: float,
    hi: float,
    points: int = 2000,
) -> float:
    """Brute-force minimizer of the exact local objective.

    Uniform candidate grid over [lo, hi], then golden-section refinement
    of the best cell down to an interval of width 1e-10.
    """
    if lo >= hi:
        raise EmptyBracket(f"need lo < hi, got [{lo}, {hi}]")
    if points < 1000:
        raise ValueError(f"points must be >= 1000, got {points}")
    objective = _objective_factory(data, x0, req)
    grid = np.linspace(lo, hi, int(points))
    vals = objective(grid)
    best = int(np.argmin(vals))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, len(grid) - 1)]

    # golden-section shrink of [a, b]
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    while b - a > 1e-10:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = objective(d)
    return float(0.5 * (a + b))


def de_fit_curve(data: Dataset, grid, req: FitRequest) -> CurveEstimate:
    """Growth-constrained fit at each grid point, failures recorded per point."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise EmptyGrid("curve evaluation needs a non-empty grid")
    z = data.working_values(req.scale)
    values = np.full(grid.size, np.nan)
    iterations = np.zeros(grid.size, dtype=int)
    converged = np.zeros(grid.size, dtype=bool)
    diagnostics = np.full(grid.size, np.nan)
    status = []
    for i, x0 in enumerate(grid):
        full = _fit_arrays(data.x, z, float(x0), req)
        status.append(full.status)
        iterations[i] = full.iterations
        if full.status in ("ok", "max_iter"):
            values[i] = full.estimate
            converged[i] = full.converged
            diagnostics[i] = full.objective
    return CurveEstimate(
        grid=grid,
        values=values,
        iterations=iterations,
        converged=converged,
        diagnostics=diagnostics,
        status=status,
    )
