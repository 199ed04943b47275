"""Compact-support smoothing kernels and their exact moment constants.

All three families live on [-1, 1] and are symmetric probability
densities, which is what the asymptotic bias/variance formulas assume.
Moments are stored as exact rationals evaluated to double precision;
``moment_quadrature`` provides an independent numerical cross-check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from scipy.integrate import quad

from .errors import NonPositiveBandwidth, UnsupportedOrder

MAX_MOMENT_ORDER = 8


class KernelFamily(enum.Enum):
    EPANECHNIKOV = "epanechnikov"
    BIWEIGHT = "biweight"
    UNIFORM = "uniform"


def _even_moment(family: KernelFamily, j: int) -> Fraction:
    # int_{-1}^{1} w^j K(w) dw for even j, from the polynomial antiderivative.
    if family is KernelFamily.EPANECHNIKOV:
        # K = 3/4 (1 - w^2)
        return Fraction(3, (j + 1) * (j + 3))
    if family is KernelFamily.BIWEIGHT:
        # K = 15/16 (1 - w^2)^2
        return (
            Fraction(15, 8)
            * (Fraction(1, j + 1) - Fraction(2, j + 3) + Fraction(1, j + 5))
        )
    # uniform: K = 1/2
    return Fraction(1, j + 1)


_ROUGHNESS = {
    KernelFamily.EPANECHNIKOV: Fraction(3, 5),
    KernelFamily.BIWEIGHT: Fraction(5, 7),
    KernelFamily.UNIFORM: Fraction(1, 2),
}

# numeric ids shared with the compiled backend
BACKEND_KERNEL_IDS = {
    KernelFamily.EPANECHNIKOV: 0,
    KernelFamily.BIWEIGHT: 1,
    KernelFamily.UNIFORM: 2,
}


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric compact-support kernel, selected by family."""

    family: KernelFamily = KernelFamily.EPANECHNIKOV

    @classmethod
    def from_name(cls, name: str) -> "KernelSpec":
        try:
            return cls(KernelFamily(name.strip().lower()))
        except ValueError:
            valid = ", ".join(f.value for f in KernelFamily)
            raise ValueError(f"unknown kernel {name!r}; expected one of: {valid}") from None

    @property
    def name(self) -> str:
        return self.family.value

    @property
    def backend_id(self) -> int:
        return BACKEND_KERNEL_IDS[self.family]

    def evaluate(self, w: float) -> float:
        """Kernel density K(w); zero outside [-1, 1]."""
        if w < -1.0 or w > 1.0:
            return 0.0
        if self.family is KernelFamily.EPANECHNIKOV:
            return 0.75 * (1.0 - w * w)
        if self.family is KernelFamily.BIWEIGHT:
            t = 1.0 - w * w
            return 0.9375 * t * t
        return 0.5

    def scaled_weight(self, h: float, u: float) -> float:
        """Rescaled kernel K_h(u) = K(u / h) / h."""
        if h <= 0.0:
            raise NonPositiveBandwidth(f"bandwidth must be > 0, got {h}")
        return self.evaluate(u / h) / h

    def moment(self, j: int) -> float:
        """j-th kernel moment, exact closed form (j <= 8; odd are 0)."""
        if j < 0 or j != int(j):
            raise ValueError(f"moment order must be a nonnegative integer, got {j}")
        j = int(j)
        if j > MAX_MOMENT_ORDER:
            raise UnsupportedOrder(f"moments stored up to order {MAX_MOMENT_ORDER}, got {j}")
        if j % 2 == 1:
            return 0.0
        return float(_even_moment(self.family, j))

    def roughness(self) -> float:
        """Squared-kernel integral R(K) = int K(w)^2 dw."""
        return float(_ROUGHNESS[self.family])

    def moment_quadrature(self, j: int) -> float:
        """Adaptive-quadrature cross-check of ``moment`` (not the primary path)."""
        val, _ = quad(lambda w: (w ** j) * self.evaluate(w), -1.0, 1.0,
                      epsabs=1e-13, epsrel=1e-13, limit=200)
        return val


EPANECHNIKOV = KernelSpec(KernelFamily.EPANECHNIKOV)
BIWEIGHT = KernelSpec(KernelFamily.BIWEIGHT)
UNIFORM = KernelSpec(KernelFamily.UNIFORM)
