"""Growth-law-constrained local kernel regression.

Local polynomial baselines, estimators constrained by the
quasi-exponential growth law g' = lambda * g**alpha, asymptotic
bias/variance/bandwidth formulas, data-driven parameter inference,
and a reproducible Monte-Carlo comparison lab.
"""

from ._backend import BACKEND
from .dataset import Dataset
from .defit import (
    DEFitResult,
    FitRequest,
    GaussNewtonOptions,
    de_fit_at,
    de_fit_closed_form_exp,
    de_fit_curve,
    de_fit_grid_oracle,
)
from .growth import (
    QuasiExpModel,
    derivative_linear,
    derivative_log,
    pi_product,
    solution,
    solve_ode_rk4,
    taylor_predict_linear,
    taylor_predict_log,
)
from .kernels import BIWEIGHT, EPANECHNIKOV, UNIFORM, KernelFamily, KernelSpec
from .localpoly import local_poly_curve, local_poly_fit_at
from .results import CurveEstimate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BIWEIGHT",
    "CurveEstimate",
    "Dataset",
    "DEFitResult",
    "EPANECHNIKOV",
    "FitRequest",
    "GaussNewtonOptions",
    "KernelFamily",
    "KernelSpec",
    "QuasiExpModel",
    "UNIFORM",
    "de_fit_at",
    "de_fit_closed_form_exp",
    "de_fit_curve",
    "de_fit_grid_oracle",
    "derivative_linear",
    "derivative_log",
    "local_poly_curve",
    "local_poly_fit_at",
    "pi_product",
    "solution",
    "solve_ode_rk4",
    "taylor_predict_linear",
    "taylor_predict_log",
    "__version__",
]
