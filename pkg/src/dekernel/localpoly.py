"""Classical local polynomial regression (local constant/linear/quadratic).

These are the baseline competitors and supply pseudo-truth curves for
the simulation lab. Fits are weighted least squares on centered powers
of (x_i - x0); sparse windows raise instead of silently dropping the
degree, so the comparison harness can count genuine method failures.
"""

from __future__ import annotations

import numpy as np

from ._corepy import _kernel_values
from .dataset import Dataset
from .errors import (
    EmptyGrid,
    InsufficientLocalData,
    NonPositiveBandwidth,
    SingularDesign,
)
from .kernels import KernelSpec
from .results import CurveEstimate

COND_LIMIT = 1e12


def local_poly_fit_at(
    data: Dataset,
    x0: float,
    degree: int,
    kernel: KernelSpec,
    h: float,
):
    """Degree-``degree`` weighted polynomial fit centered at ``x0``.

    Returns ``(estimate, coefficients, n_eff)`` where ``coefficients[j]``
    is the regression coefficient on (x - x0)**j, i.e. an estimate of
    the j-th derivative divided by j!.
    """
    if h <= 0.0:
        raise NonPositiveBandwidth(f"bandwidth must be > 0, got {h}")
    if degree < 0 or degree != int(degree):
        raise ValueError(f"degree must be a nonnegative integer, got {degree}")
    degree = int(degree)

    dx = data.x - x0
    w = _kernel_values(dx / h, kernel.backend_id) / h
    mask = w > 0.0
    n_eff = int(np.count_nonzero(mask))
    n_distinct = len(np.unique(data.x[mask]))
    if n_distinct < degree + 1:
        raise InsufficientLocalData(
            f"{n_distinct} distinct weighted point(s) near x0={x0}, "
            f"need {degree + 1} for degree {degree}"
        )

    dxm = dx[mask]
    sw = np.sqrt(w[mask])
    powers = np.arange(degree + 1)
    design = dxm[:, None] ** powers[None, :] * sw[:, None]

    # condition of the normal-equations matrix of the centered design
    sv = np.linalg.svd(design, compute_uv=False)
    if sv[-1] == 0.0 or (sv[0] / sv[-1]) ** 2 > COND_LIMIT:
        raise SingularDesign(f"local design at x0={x0} is numerically singular")

    # solve on the h-scaled design for stability, then undo the scaling
    scaled = (dxm / h)[:, None] ** powers[None, :] * sw[:, None]
    beta_scaled, *_ = np.linalg.lstsq(scaled, data.y[mask] * sw, rcond=None)
    beta = beta_scaled / h ** powers
    return float(beta[0]), [float(b) for b in beta], n_eff


def local_poly_curve(
    data: Dataset,
    grid,
    degree: int,
    kernel: KernelSpec,
    h: float,
) -> CurveEstimate:
    """Vectorized wrapper: fit at each grid point, recording failures per point."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise EmptyGrid("curve evaluation needs a non-empty grid")
    values = np.full(grid.size, np.nan)
    converged = np.zeros(grid.size, dtype=bool)
    status = []
    for i, x0 in enumerate(grid):
        try:
            values[i], _, _ = local_poly_fit_at(data, float(x0), degree, kernel, h)
            converged[i] = True
            status.append("ok")
        except InsufficientLocalData:
            status.append("insufficient_data")
        except SingularDesign:
            status.append("singular_design")
    return CurveEstimate(
        grid=grid,
        values=values,
        iterations=np.zeros(grid.size, dtype=int),
        converged=converged,
        diagnostics=np.full(grid.size, np.nan),
        status=status,
    )
