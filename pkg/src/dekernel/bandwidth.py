"""Asymptotic bias/variance, optimal bandwidths, and cross-validation.

The direct bandwidth formulas minimize leading-order squared bias plus
variance. The step-up recursions (degree k to k+2) are implemented
verbatim as published; ``bandwidth_step_audit`` compares them against
the direct formula at degree k+2 and reports the discrepancy instead
of silently "correcting" either side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dataset import Dataset
from .errors import AllBandwidthsInfeasible, DegenerateBias, DekernelError
from .growth import QuasiExpModel, pi_product, solution
from .kernels import KernelSpec


@dataclass(frozen=True)
class DesignDensity:
    """Density f of the design points, with its derivative.

    For fixed (non-random) designs use the uniform density of the
    design interval.
    """

    kind: str
    value_at: Callable[[float], float]
    derivative_at: Callable[[float], float]

    @classmethod
    def uniform(cls, a: float, b: float) -> "DesignDensity":
        if not b > a:
            raise ValueError(f"need b > a, got [{a}, {b}]")
        dens = 1.0 / (b - a)
        return cls("uniform", lambda x: dens, lambda x: 0.0)

    @classmethod
    def tabulated(cls, value_at, derivative_at) -> "DesignDensity":
        return cls("tabulated", value_at, derivative_at)

    def checked_value(self, x: float) -> float:
        f = self.value_at(x)
        if f <= 0.0:
            raise ValueError(f"design density must be > 0 at x={x}, got {f}")
        return f


@dataclass(frozen=True)
class NoiseSpec:
    """Error standard deviation on the working scale."""

    sigma: float

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


def _even_bias_bracket(model, x, k, density) -> float:
    g = solution(model, x)
    f = density.checked_value(x)
    return (
        model.lam * ((k + 1) * model.alpha - k) * g ** (model.alpha - 1.0) / (k + 2)
        + density.derivative_at(x) / f
    )


def asymptotic_bias(
    model: QuasiExpModel,
    x: float,
    k: int,
    h: float,
    kernel: KernelSpec,
    density: DesignDensity,
) -> float:
    """Leading-order conditional bias of the degree-k constrained estimator.

    Odd k:  g^(k+1)(x) / (k+1)! * h**(k+1) * mu_{k+1}.
    Even k: the same derivative times the density/drift bracket and
    h**(k+2) * mu_{k+2}. Degree 0 reduces to the classical local
    constant bias, since g'' = alpha*lam*g**(alpha-1) * g'.
    """
    if not 0 <= k <= 6:
        raise ValueError(f"degree k must be in [0, 6], got {k}")
    g = solution(model, x)
    deriv = model.lam ** (k + 1) * pi_product(model.alpha, k + 1) * g ** (
        (k + 1) * model.alpha - k
    )
    lead = deriv / math.factorial(k + 1)
    if k % 2 == 1:
        return lead * h ** (k + 1) * kernel.moment(k + 1)
    return lead * _even_bias_bracket(model, x, k, density) * h ** (k + 2) * kernel.moment(k + 2)


def asymptotic_variance(
    noise: NoiseSpec,
    n: int,
    h: float,
    kernel: KernelSpec,
    density: DesignDensity,
    x: float,
) -> float:
    """Leading-order conditional variance sigma^2 R(K) / (n h f(x))."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if h <= 0.0:
        raise ValueError(f"h must be > 0, got {h}")
    return noise.sigma ** 2 * kernel.roughness() / (n * h * density.checked_value(x))


def optimal_bandwidth_direct(
    model: QuasiExpModel,
    x: float,
    k: int,
    n: int,
    noise: NoiseSpec,
    kernel: KernelSpec,
    density: DesignDensity,
) -> float:
    """Bandwidth minimizing leading-order squared bias plus variance.

    Odd k solves h**(2k+3) = variance-scale / bias-scale; even k the
    (2k+5)-th root with the squared bias bracket in the denominator.
    """
    if not 0 <= k <= 6:
        raise ValueError(f"degree k must be in [0, 6], got {k}")
    pi_next = pi_product(model.alpha, k + 1)
    if pi_next == 0.0:
        raise DegenerateBias(
            f"leading bias vanishes at degree {k} for alpha={model.alpha}"
        )
    g = solution(model, x)
    f = density.checked_value(x)
    s2R = noise.sigma ** 2 * kernel.roughness()
    fact2 = math.factorial(k + 1) ** 2
    bias_core = (
        model.lam ** (2 * k + 2)
        * pi_next ** 2
        * g ** (2 * (k + 1) * model.alpha - 2 * k)
    )
    if k % 2 == 1:
        mu = kernel.moment(k + 1)
        radicand = s2R * fact2 / (n * f * bias_core * (2 * k + 2) * mu ** 2)
        return radicand ** (1.0 / (2 * k + 3))
    bracket = _even_bias_bracket(model, x, k, density)
    if bracket == 0.0:
        raise DegenerateBias(f"even-degree bias bracket vanishes at x={x}")
    mu = kernel.moment(k + 2)
    radicand = s2R * fact2 / (
        n * f * bias_core * bracket ** 2 * (2 * k + 4) * mu ** 2
    )
    return radicand ** (1.0 / (2 * k + 5))


def optimal_bandwidth_step(
    model: QuasiExpModel,
    x: float,
    k: int,
    h_ok: float,
    density: DesignDensity,
) -> float:
    """Published recursion taking the optimal h at degree k to degree k+2.

    Implemented verbatim as printed; see ``bandwidth_step_audit`` for
    the known discrepancy against the direct formula.
    """
    if not 0 <= k <= 4:
        raise ValueError(f"step recursion supports k in [0, 4], got {k}")
    if h_ok <= 0.0:
        raise ValueError(f"h_ok must be > 0, got {h_ok}")
    if pi_product(model.alpha, k + 1) == 0.0 or pi_product(model.alpha, k + 3) == 0.0:
        raise DegenerateBias(
            f"leading bias vanishes at degree {k} or {k + 2} for alpha={model.alpha}"
        )
    a, lam = model.alpha, model.lam
    g = solution(model, x)
    f1 = (k + 1) * a - k          # pi factor entering degree k+1
    f2 = (k + 2) * a - (k + 1)    # pi factor entering degree k+2
    if k % 2 == 1:
        num = (k + 3) * (k + 1)
        den = lam ** 4 * f2 ** 2 * f1 ** 2 * g ** (4.0 * a - 4.0)
        return (num / den * h_ok ** (2 * k + 3)) ** (1.0 / (2 * k + 7))
    bracket_k = _even_bias_bracket(model, x, k, density)
    bracket_k2 = _even_bias_bracket(model, x, k + 2, density)
    if bracket_k == 0.0 or bracket_k2 == 0.0:
        raise DegenerateBias(f"even-degree bias bracket vanishes at x={x}")
    num = (k + 2) ** 3
    den = (k + 4) * lam ** 4 * f1 ** 2 * f2 ** 2 * g ** (4.0 * a - 4.0)
    return (
        num / den * (bracket_k / bracket_k2) ** 2 * h_ok ** (2 * k + 5)
    ) ** (1.0 / (2 * k + 9))


@dataclass(frozen=True)
class StepAudit:
    """Step-recursion result next to the direct formula at degree k+2."""

    degree_from: int
    degree_to: int
    h_direct_base: float
    h_step: float
    h_direct_target: float
    ratio: float  # h_step / h_direct_target
    mismatch_flagged: bool

    def as_dict(self) -> dict:
        return {
            "degree_from": self.degree_from,
            "degree_to": self.degree_to,
            "h_direct_base": self.h_direct_base,
            "h_step": self.h_step,
            "h_direct_target": self.h_direct_target,
            "ratio_step_over_direct": self.ratio,
            "mismatch_flagged": self.mismatch_flagged,
            "note": (
                "step recursion implemented verbatim; it disagrees with the "
                "direct optimum at degree k+2 by a known constant factor"
            ),
        }


def bandwidth_step_audit(
    model: QuasiExpModel,
    x: float,
    k: int,
    n: int,
    noise: NoiseSpec,
    kernel: KernelSpec,
    density: DesignDensity,
) -> StepAudit:
    """Compare the verbatim step recursion against the direct formula."""
    h_base = optimal_bandwidth_direct(model, x, k, n, noise, kernel, density)
    h_step = optimal_bandwidth_step(model, x, k, h_base, density)
    h_direct = optimal_bandwidth_direct(model, x, k + 2, n, noise, kernel, density)
    ratio = h_step / h_direct
    return StepAudit(
        degree_from=k,
        degree_to=k + 2,
        h_direct_base=h_base,
        h_step=h_step,
        h_direct_target=h_direct,
        ratio=ratio,
        mismatch_flagged=abs(ratio - 1.0) > 1e-6,
    )


def loocv_scores(
    data: Dataset,
    fit_fn: Callable[[Dataset, float, float], float],
    h_grid,
) -> list[tuple[float, Optional[float]]]:
    """Mean leave-one-out squared prediction error per candidate bandwidth.

    ``fit_fn(train, x0, h)`` must return the prediction at ``x0`` or
    raise a library error; any failing held-out fit marks that h
    infeasible (score ``None``).
    """
    h_grid = [float(h) for h in h_grid]
    if not h_grid:
        raise ValueError("h_grid must be non-empty")
    n = len(data)
    if n < 2:
        return [(h, None) for h in h_grid]
    scores: list[tuple[float, Optional[float]]] = []
    for h in h_grid:
        total = 0.0
        feasible = True
        for i in range(n):
            train = Dataset(np.delete(data.x, i), np.delete(data.y, i), data.scale)
            try:
                pred = fit_fn(train, float(data.x[i]), h)
            except DekernelError:
                feasible = False
                break
            total += (pred - float(data.y[i])) ** 2
        scores.append((h, total / n if feasible else None))
    return scores


def loocv_bandwidth(
    data: Dataset,
    fit_fn: Callable[[Dataset, float, float], float],
    h_grid,
) -> float:
    """Grid bandwidth minimizing LOO squared error; ties go to smaller h.

    Scores within an exact-fit resolution of the minimum (predictions
    matching responses to ~1e-10 relative) count as ties, so float fuzz
    never decides between bandwidths that all interpolate the data.
    """
    scores = loocv_scores(data, fit_fn, h_grid)
    feasible = [(h, s) for h, s in scores if s is not None]
    if not feasible:
        raise AllBandwidthsInfeasible(
            f"no bandwidth among {sorted(h for h, _ in scores)} admits all LOO fits"
        )
    best = min(s for _, s in feasible)
    tie_floor = (1e-10 * max(1e-30, float(np.max(np.abs(data.y))))) ** 2
    return min(h for h, s in feasible if s <= best + tie_floor)
