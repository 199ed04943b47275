"""Pure-numpy implementation of the hot single-point fitting kernel.

Mirrors the compiled extension ``dekernel._core`` operation for
operation; the extension is preferred at import time when available
(see ``_backend``). Keep the two in sync.

Status codes shared with the extension:
    0  converged
    1  iteration budget exhausted (estimate still returned)
    2  no positively weighted design point near x0
    3  linear-scale iterate forced to a non-positive value
"""

from __future__ import annotations

import math

import numpy as np

STATUS_OK = 0
STATUS_MAX_ITER = 1
STATUS_NO_DATA = 2
STATUS_LEFT_DOMAIN = 3


def _kernel_values(u, kernel_id):
    inside = np.abs(u) <= 1.0
    if kernel_id == 0:  # epanechnikov
        vals = 0.75 * (1.0 - u * u)
    elif kernel_id == 1:  # biweight
        t = 1.0 - u * u
        vals = 0.9375 * t * t
    else:  # uniform
        vals = np.full_like(u, 0.5)
    return np.where(inside, vals, 0.0)


def _predictor_terms(alpha, lam, k, log_scale):
    # dx-independent coefficients of the degree-k growth-law expansion
    coeff = np.empty(k)
    for p in range(1, k + 1):
        if log_scale:
            coeff[p - 1] = lam ** p * (alpha - 1.0) ** (p - 1) / p if p > 1 else lam
        else:
            prod = 1.0
            for l in range(1, p + 1):
                prod *= (l - 1) * alpha - (l - 2)
            coeff[p - 1] = lam ** p * prod / math.factorial(p)
    return coeff


def de_fit_point(
    x,
    z,
    x0,
    kernel_id,
    h,
    alpha,
    lam,
    k,
    log_scale,
    a_init=0.0,
    use_init=False,
    max_iter=100,
    rel_tol=1e-10,
    max_halvings=30,
    trace=None,
):
    """Gauss-Newton minimizer of the growth-law-constrained local objective.

    Returns (estimate, iterations, converged, objective, n_eff, status).
    ``trace``, if a list, receives the objective value at the start and
    after every accepted step (diagnostic; absent from the compiled twin).
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    w = _kernel_values((x - x0) / h, kernel_id) / h
    mask = w > 0.0
    n_eff = int(np.count_nonzero(mask))
    if n_eff == 0:
        return math.nan, 0, False, math.nan, 0, STATUS_NO_DATA

    dx = x[mask] - x0
    zw = z[mask]
    ww = w[mask]
    coeff = _predictor_terms(alpha, lam, k, log_scale)
    exps = np.array([p * alpha - (p - 1.0) for p in range(1, k + 1)])
    dx_pows = dx[:, None] ** np.arange(1, k + 1)[None, :]
    ps = np.arange(1, k + 1, dtype=float)

    floor = 1e-12 * max(1.0, float(np.max(np.abs(zw))))

    def pred_and_jac(a):
        if log_scale:
            state = np.exp(ps * (alpha - 1.0) * a)
            terms = coeff * state
            jac_terms = terms * ps * (alpha - 1.0)
        else:
            state = a ** exps
            terms = coeff * state
            jac_terms = coeff * exps * a ** (exps - 1.0)
        pred = a + dx_pows @ terms
        jac = 1.0 + dx_pows @ jac_terms
        return pred, jac

    def objective(a):
        if log_scale:
            terms = coeff * np.exp(ps * (alpha - 1.0) * a)
        else:
            terms = coeff * a ** exps
        r = zw - a - dx_pows @ terms
        return float(np.dot(ww, r * r))

    if use_init:
        a = float(a_init)
    else:
        a = float(np.dot(ww, zw) / np.sum(ww))
    if not log_scale and a <= floor:
        return math.nan, 0, False, math.nan, n_eff, STATUS_LEFT_DOMAIN

    obj = objective(a)
    if trace is not None:
        trace.append(obj)
    iterations = 0
    converged = False
    status = STATUS_MAX_ITER

    for _ in range(max_iter):
        iterations += 1
        pred, jac = pred_and_jac(a)
        r = zw - pred
        s_rj = float(np.dot(ww, r * jac))
        s_jj = float(np.dot(ww, jac * jac))
        if s_jj <= 0.0:
            converged = s_rj == 0.0
            status = STATUS_OK if converged else STATUS_MAX_ITER
            break
        delta = s_rj / s_jj

        step = delta
        accepted = False
        floor_blocked = True
        for _ in range(max_halvings + 1):
            a_new = a + step
            if not log_scale and a_new <= floor:
                step *= 0.5
                continue
            floor_blocked = False
            obj_new = objective(a_new)
            if obj_new <= obj:
                accepted = True
                break
            step *= 0.5

        if not accepted:
            if floor_blocked:
                return a, iterations, False, obj, n_eff, STATUS_LEFT_DOMAIN
            # stationary up to roundoff: converged iff the full step was tiny
            converged = abs(delta) <= rel_tol * max(1.0, abs(a))
            status = STATUS_OK if converged else STATUS_MAX_ITER
            break

        a = a_new
        obj = obj_new
        if trace is not None:
            trace.append(obj)
        if abs(step) <= rel_tol * max(1.0, abs(a)):
            converged = True
            status = STATUS_OK
            break

    return a, iterations, converged, obj, n_eff, status
