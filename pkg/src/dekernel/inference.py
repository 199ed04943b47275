"""Data-driven estimation of the growth-law parameters (alpha, lambda).

The log of the explicit trajectory is approximately
(log(1-alpha) + log(lambda) + log(x)) / (1-alpha) when g(0) is tiny,
so the slope of log y on log x estimates 1/(1-alpha). Given alpha,
lambda comes from one-dimensional nonlinear least squares against
y = ((1-alpha) * lambda * x) ** (1/(1-alpha)); a final Gauss-Newton
pass can refine both parameters jointly on the log scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import (
    DegenerateDesign,
    NearZeroSlope,
    NoConvergence,
    NoFeasibleLambda,
    NonPositiveData,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class ParamEstimate:
    alpha_hat: float
    lambda_hat: float
    slope: float          # fitted 1/(1-alpha)
    residual_sse: float


def _loglog_points(data: Dataset):
    y_lin = data.working_values("linear") if data.scale == "linear" else None
    if data.scale == "log":
        z = data.y
        keep = data.x > 0.0
    else:
        keep = (data.x > 0.0) & (y_lin > 0.0)
        z = np.where(keep, np.log(np.where(keep, y_lin, 1.0)), 0.0)
    if int(np.count_nonzero(keep)) < 2:
        raise NonPositiveData(
            "need at least two observations with x > 0 and y > 0"
        )
    return np.log(data.x[keep]), z[keep]


def estimate_alpha(data: Dataset):
    """OLS slope of log y on log x; returns (alpha_hat, slope).

    alpha_hat = 1 - 1/slope. Values outside (0, 1] are returned as-is
    so callers can record model misfit instead of masking it.
    """
    lx, lz = _loglog_points(data)
    lx_c = lx - lx.mean()
    sxx = float(np.dot(lx_c, lx_c))
    if sxx == 0.0:
        raise DegenerateDesign("all log-design points coincide")
    slope = float(np.dot(lx_c, lz - lz.mean())) / sxx
    if abs(slope) < 1e-8:
        raise NearZeroSlope(f"log-log slope {slope} too close to 0")
    return 1.0 - 1.0 / slope, slope


def estimate_lambda(data: Dataset, alpha_hat: float) -> float:
    """One-dimensional NLS for the growth rate given alpha_hat < 1.

    Bracket from the log-log intercept, golden-section minimization,
    then a Gauss-Newton polish. The search stays on lambda > 0, the
    region where the approximate trajectory is defined.
    """
    if alpha_hat >= 1.0:
        raise NoFeasibleLambda(f"need alpha_hat < 1, got {alpha_hat}")
    y = data.working_values("linear")
    keep = (data.x > 0.0) & (y > 0.0)
    if int(np.count_nonzero(keep)) < 1:
        raise NoFeasibleLambda("no observation with x > 0 and y > 0")
    x, yv = data.x[keep], y[keep]
    one_m = 1.0 - alpha_hat
    c = 1.0 / one_m

    def sse(lam):
        pred = (one_m * lam * x) ** c
        r = yv - pred
        return float(np.dot(r, r))

    # bracket center from G(x) ~ (log(1-a) + log(lam) + log(x)) / (1-a)
    intercept = float(np.mean(np.log(yv) * one_m - np.log(x)))
    lam0 = math.exp(intercept) / one_m
    lo, hi = lam0 / 64.0, lam0 * 64.0

    a, b = lo, hi
    cpt = b - _GOLDEN * (b - a)
    dpt = a + _GOLDEN * (b - a)
    fc, fd = sse(cpt), sse(dpt)
    while b - a > 1e-12 * max(1.0, b):
        if fc <= fd:
            b, dpt, fd = dpt, cpt, fc
            cpt = b - _GOLDEN * (b - a)
            fc = sse(cpt)
        else:
            a, cpt, fc = cpt, dpt, fd
            dpt = a + _GOLDEN * (b - a)
            fd = sse(dpt)
    lam = 0.5 * (a + b)

    # one-parameter Gauss-Newton polish
    obj = sse(lam)
    for _ in range(50):
        u = one_m * lam * x
        pred = u ** c
        jac = x * u ** (c - 1.0)  # d pred / d lam
        r = yv - pred
        denom = float(np.dot(jac, jac))
        if denom == 0.0:
            break
        step = float(np.dot(jac, r)) / denom
        improved = False
        for _ in range(30):
            lam_new = lam + step
            if lam_new > 0.0:
                obj_new = sse(lam_new)
                if obj_new <= obj:
                    improved = True
                    break
            step *= 0.5
        if not improved:
            break
        moved = abs(lam_new - lam)
        lam, obj = lam_new, obj_new
        if moved <= 1e-12 * max(1.0, abs(lam)):
            break
    else:
        raise NoConvergence("lambda polish did not stabilize in 50 iterations")
    return lam


def infer_parameters(data: Dataset) -> ParamEstimate:
    """Convenience pipeline: alpha from the log-log slope, then lambda."""
    alpha_hat, slope = estimate_alpha(data)
    lam_hat = estimate_lambda(data, alpha_hat)
    y = data.working_values("linear")
    keep = (data.x > 0.0) & (y > 0.0)
    pred = ((1.0 - alpha_hat) * lam_hat * data.x[keep]) ** (1.0 / (1.0 - alpha_hat))
    r = y[keep] - pred
    return ParamEstimate(alpha_hat, lam_hat, slope, float(np.dot(r, r)))


def log_trajectory(alpha, lam, g0, x):
    """Log of the approximate trajectory and its base (vectorized)."""
    base = g0 ** (1.0 - alpha) + (1.0 - alpha) * lam * x
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.log(base) / (1.0 - alpha), base


def nls_solution_fit(
    data: Dataset,
    init: ParamEstimate,
    refine_alpha: bool = True,
    g0: float | None = None,
    max_iter: int = 100,
    rel_tol: float = 1e-10,
):
    """Global trajectory fit on log-scale residuals by Gauss-Newton.

    Refines (alpha, lambda) jointly by default; with
    ``refine_alpha=False`` alpha_hat stays fixed and only lambda moves.
    g(0) is pinned to a small positive floor (1e-8 of the response
    maximum) unless supplied. Returns ``(ParamEstimate, fitted)`` with
    the fitted log-scale curve on the design points; non-convergence is
    reported by flagging, with the best iterate kept.
    """
    y_lin = data.working_values("linear")
    keep = data.x > 0.0
    x = data.x[keep]
    z = np.log(y_lin[keep])
    if g0 is None:
        g0 = 1e-8 * float(np.max(y_lin))
    if g0 <= 0.0:
        raise ValueError(f"g0 floor must be > 0, got {g0}")

    theta = np.array([init.alpha_hat, init.lambda_hat], dtype=float)

    def residuals(t):
        alpha, lam = t
        if alpha >= 1.0 - 1e-12:
            return None
        G, base = log_trajectory(alpha, lam, g0, x)
        if np.any(base <= 0.0):
            return None
        return z - G

    def jac(t):
        alpha, lam = t
        one_m = 1.0 - alpha
        base = g0 ** one_m + one_m * lam * x
        dG_dlam = x / base
        dbase_da = -(g0 ** one_m) * math.log(g0) - lam * x
        dG_da = np.log(base) / one_m ** 2 + dbase_da / (one_m * base)
        if refine_alpha:
            return np.column_stack([dG_da, dG_dlam])
        return dG_dlam[:, None]

    r = residuals(theta)
    if r is None:
        raise NoFeasibleLambda("initial parameters leave the trajectory domain")
    obj = float(np.dot(r, r))
    converged = False
    for _ in range(max_iter):
        J = jac(theta)
        step, *_ = np.linalg.lstsq(J, r, rcond=None)
        if not refine_alpha:
            full = np.array([0.0, float(step[0])])
        else:
            full = np.array([float(step[0]), float(step[1])])
        accepted = False
        for _ in range(30):
            cand = theta + full
            r_new = residuals(cand)
            if r_new is not None:
                obj_new = float(np.dot(r_new, r_new))
                if obj_new <= obj:
                    accepted = True
                    break
            full = full * 0.5
        if not accepted:
            converged = float(np.linalg.norm(step)) <= rel_tol * max(
                1.0, float(np.linalg.norm(theta))
            )
            break
        moved = float(np.linalg.norm(full))
        theta, r, obj = cand, r_new, obj_new
        if moved <= rel_tol * max(1.0, float(np.linalg.norm(theta))):
            converged = True
            break

    alpha, lam = float(theta[0]), float(theta[1])
    G_fit, _ = log_trajectory(alpha, lam, g0, data.x)
    est = ParamEstimate(alpha, lam, 1.0 / (1.0 - alpha), obj)
    return est, G_fit, converged
