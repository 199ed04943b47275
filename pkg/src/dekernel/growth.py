"""Quasi-exponential growth law g' = lambda * g**alpha and its calculus.

Everything the estimators need from the growth law lives here: the
derivative products, closed-form derivatives on the original and log
scales, truncated Taylor predictors, the explicit trajectory, and a
Runge-Kutta integrator used as an independent cross-check of the
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    DegreeOutOfRange,
    NonPositiveState,
    SolutionUndefined,
    StateCollapse,
)

MAX_TAYLOR_DEGREE = 6


@dataclass(frozen=True)
class QuasiExpModel:
    """Growth model g'(x) = lam * g(x)**alpha with 0 < alpha <= 1.

    ``g0`` is the initial value g(0); it only matters to the explicit
    trajectory and the ODE integrator, not to the local estimators.
    """

    alpha: float
    lam: float
    g0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.lam == 0.0:
            raise ValueError("lambda must be nonzero")
        if self.g0 <= 0.0:
            raise ValueError(f"g0 must be > 0, got {self.g0}")


def pi_product(alpha: float, p: int) -> float:
    """Product of the derivative factors (l-1)*alpha - (l-2) for l = 1..p.

    Appears in the p-th derivative of g; vanishes identically for
    p >= 3 when alpha = 1/2, making the trajectory a quadratic.
    """
    if p < 1 or p != int(p):
        raise ValueError(f"p must be a positive integer, got {p}")
    prod = 1.0
    for l in range(1, int(p) + 1):
        prod *= (l - 1) * alpha - (l - 2)
    return prod


def derivative_linear(model: QuasiExpModel, g_value: float, p: int) -> float:
    """p-th derivative of g at a point where g equals ``g_value``."""
    if g_value <= 0.0:
        raise NonPositiveState(f"g must be > 0, got {g_value}")
    a, lam = model.alpha, model.lam
    return lam ** p * pi_product(a, p) * g_value ** (p * a - (p - 1))


def derivative_log(model: QuasiExpModel, G_value: float, p: int) -> float:
    """p-th derivative of G = log g at a point where G equals ``G_value``."""
    if p < 1 or p != int(p):
        raise ValueError(f"p must be a positive integer, got {p}")
    p = int(p)
    a, lam = model.alpha, model.lam
    # (alpha-1)**(p-1) as an explicit product so alpha=1, p=1 gives 1, not 0**0.
    shift = 1.0
    for _ in range(p - 1):
        shift *= a - 1.0
    return math.factorial(p - 1) * lam ** p * shift * math.exp(p * (a - 1.0) * G_value)


def solution(model: QuasiExpModel, x: float) -> float:
    """Explicit trajectory through (0, g0).

    For alpha < 1 this is [g0**(1-alpha) + (1-alpha)*lam*x]**(1/(1-alpha));
    alpha = 1 is the exponential branch g0 * exp(lam * x).
    """
    a, lam, g0 = model.alpha, model.lam, model.g0
    if a == 1.0:
        return g0 * math.exp(lam * x)
    base = g0 ** (1.0 - a) + (1.0 - a) * lam * x
    if base <= 0.0:
        raise SolutionUndefined(
            f"trajectory base {base} <= 0 at x={x} (decaying model past extinction)"
        )
    return base ** (1.0 / (1.0 - a))


def solve_ode_rk4(model: QuasiExpModel, x: float, step: float = 1e-4) -> float:
    """Classical RK4 integration of the growth law from (0, g0) to x.

    Deliberately independent of ``solution``; serves as its oracle.
    """
    if step <= 0.0:
        raise ValueError(f"step must be > 0, got {step}")
    a, lam = model.alpha, model.lam

    def f(g):
        if g <= 0.0:
            raise StateCollapse("integrated state fell to a non-positive value")
        return lam * g ** a

    g = model.g0
    t = 0.0
    n_full, rem = divmod(x, step)
    for _ in range(int(n_full)):
        k1 = f(g)
        k2 = f(g + 0.5 * step * k1)
        k3 = f(g + 0.5 * step * k2)
        k4 = f(g + step * k3)
        g += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += step
    if rem > 0.0:
        k1 = f(g)
        k2 = f(g + 0.5 * rem * k1)
        k3 = f(g + 0.5 * rem * k2)
        k4 = f(g + rem * k3)
        g += (rem / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if g <= 0.0:
        raise StateCollapse("integrated state fell to a non-positive value")
    return g


def _check_degree(k: int):
    if not 1 <= k <= MAX_TAYLOR_DEGREE or k != int(k):
        raise DegreeOutOfRange(f"Taylor degree must be in [1, {MAX_TAYLOR_DEGREE}], got {k}")


def taylor_predict_linear(model: QuasiExpModel, g_at_x: float, dx: float, k: int) -> float:
    """Degree-k Taylor value of g at offset dx, derivatives via the growth law."""
    _check_degree(k)
    if g_at_x <= 0.0:
        raise NonPositiveState(f"g must be > 0, got {g_at_x}")
    a, lam = model.alpha, model.lam
    total = g_at_x
    dx_pow = 1.0
    for p in range(1, int(k) + 1):
        dx_pow *= dx
        total += (
            dx_pow / math.factorial(p)
            * lam ** p * pi_product(a, p) * g_at_x ** (p * a - (p - 1))
        )
    return total


def taylor_predict_log(model: QuasiExpModel, G_at_x: float, dx: float, k: int) -> float:
    """Degree-k Taylor value of G = log g at offset dx via the log-scale law."""
    _check_degree(k)
    a, lam = model.alpha, model.lam
    total = G_at_x
    dx_pow = 1.0
    shift = 1.0  # (alpha-1)**(p-1)
    for p in range(1, int(k) + 1):
        dx_pow *= dx
        total += dx_pow / p * lam ** p * shift * math.exp(p * (a - 1.0) * G_at_x)
        shift *= a - 1.0
    return total
