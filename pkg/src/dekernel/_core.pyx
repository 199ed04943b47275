# Compiled implementation of the hot single-point fitting kernel.
# Semantics mirror dekernel._corepy exactly; keep the two in sync.

from libc.math cimport exp, fabs, pow, NAN

import numpy as np

STATUS_OK = 0
STATUS_MAX_ITER = 1
STATUS_NO_DATA = 2
STATUS_LEFT_DOMAIN = 3

cdef inline double _kernel_value(double u, int kernel_id) nogil:
    cdef double t
    if u < -1.0 or u > 1.0:
        return 0.0
    if kernel_id == 0:
        return 0.75 * (1.0 - u * u)
    if kernel_id == 1:
        t = 1.0 - u * u
        return 0.9375 * t * t
    return 0.5


cdef double _objective(double a, double* dx, double* z, double* w, int m,
                       double* coeff, double* exps, int k, bint log_scale,
                       double alpha) nogil:
    cdef double term[8]
    cdef int p, i
    cdef double obj = 0.0, pred, dxp, r
    for p in range(k):
        if log_scale:
            term[p] = coeff[p] * exp((p + 1) * (alpha - 1.0) * a)
        else:
            term[p] = coeff[p] * pow(a, exps[p])
    for i in range(m):
        pred = a
        dxp = 1.0
        for p in range(k):
            dxp *= dx[i]
            pred += dxp * term[p]
        r = z[i] - pred
        obj += w[i] * r * r
    return obj


def de_fit_point(double[::1] x, double[::1] z, double x0, int kernel_id, double h,
                 double alpha, double lam, int k, bint log_scale,
                 double a_init=0.0, bint use_init=False,
                 int max_iter=100, double rel_tol=1e-10, int max_halvings=30):
    """Gauss-Newton minimizer of the growth-law-constrained local objective.

    Returns (estimate, iterations, converged, objective, n_eff, status).
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i
    cdef int n_eff = 0
    cdef double w, zmax = 0.0

    for i in range(n):
        w = _kernel_value((x[i] - x0) / h, kernel_id) / h
        if w > 0.0:
            n_eff += 1
            if fabs(z[i]) > zmax:
                zmax = fabs(z[i])
    if n_eff == 0:
        return (float("nan"), 0, False, float("nan"), 0, STATUS_NO_DATA)

    dx_arr = np.empty(n_eff, dtype=np.float64)
    z_arr = np.empty(n_eff, dtype=np.float64)
    w_arr = np.empty(n_eff, dtype=np.float64)
    cdef double[::1] dxv = dx_arr
    cdef double[::1] zv = z_arr
    cdef double[::1] wv = w_arr
    cdef int j = 0
    for i in range(n):
        w = _kernel_value((x[i] - x0) / h, kernel_id) / h
        if w > 0.0:
            dxv[j] = x[i] - x0
            zv[j] = z[i]
            wv[j] = w
            j += 1

    cdef double coeff[8]
    cdef double exps[8]
    cdef double prod, lam_pow, shift
    cdef int p, l
    lam_pow = 1.0
    shift = 1.0
    for p in range(1, k + 1):
        lam_pow *= lam
        if log_scale:
            coeff[p - 1] = lam_pow * shift / p
            shift *= alpha - 1.0
        else:
            prod = 1.0
            for l in range(1, p + 1):
                prod *= (l - 1) * alpha - (l - 2)
            # prod / p! folded incrementally below
            coeff[p - 1] = lam_pow * prod
        exps[p - 1] = p * alpha - (p - 1.0)
    if not log_scale:
        prod = 1.0
        for p in range(1, k + 1):
            prod *= p  # p!
            coeff[p - 1] /= prod

    cdef double floor = 1e-12 * (1.0 if zmax < 1.0 else zmax)
    cdef double a, obj, obj_new, a_new, delta, step, s_rj, s_jj
    cdef double pred, jac, dxp, r
    cdef double term[8]
    cdef double jterm[8]
    cdef int iterations = 0, halvings
    cdef bint converged = False, accepted, floor_blocked
    cdef int status = 1  # max_iter until proven otherwise
    cdef int left_domain = 0
    cdef double* dxp_ptr = &dxv[0]
    cdef double* zp = &zv[0]
    cdef double* wp = &wv[0]

    if use_init:
        a = a_init
    else:
        s_rj = 0.0
        s_jj = 0.0
        for i in range(n_eff):
            s_rj += wv[i] * zv[i]
            s_jj += wv[i]
        a = s_rj / s_jj
    if not log_scale and a <= floor:
        return (float("nan"), 0, False, float("nan"), n_eff, STATUS_LEFT_DOMAIN)

    with nogil:
        obj = _objective(a, dxp_ptr, zp, wp, n_eff, coeff, exps, k, log_scale, alpha)
        while iterations < max_iter:
            iterations += 1
            for p in range(k):
                if log_scale:
                    term[p] = coeff[p] * exp((p + 1) * (alpha - 1.0) * a)
                    jterm[p] = term[p] * (p + 1) * (alpha - 1.0)
                else:
                    term[p] = coeff[p] * pow(a, exps[p])
                    jterm[p] = coeff[p] * exps[p] * pow(a, exps[p] - 1.0)
            s_rj = 0.0
            s_jj = 0.0
            for i in range(n_eff):
                pred = a
                jac = 1.0
                dxp = 1.0
                for p in range(k):
                    dxp *= dxp_ptr[i]
                    pred += dxp * term[p]
                    jac += dxp * jterm[p]
                r = zp[i] - pred
                s_rj += wp[i] * r * jac
                s_jj += wp[i] * jac * jac
            if s_jj <= 0.0:
                converged = s_rj == 0.0
                status = 0 if converged else 1
                break
            delta = s_rj / s_jj

            step = delta
            accepted = False
            floor_blocked = True
            for halvings in range(max_halvings + 1):
                a_new = a + step
                if not log_scale and a_new <= floor:
                    step *= 0.5
                    continue
                floor_blocked = False
                obj_new = _objective(a_new, dxp_ptr, zp, wp, n_eff,
                                     coeff, exps, k, log_scale, alpha)
                if obj_new <= obj:
                    accepted = True
                    break
                step *= 0.5

            if not accepted:
                if floor_blocked:
                    left_domain = 1
                    break
                converged = fabs(delta) <= rel_tol * (1.0 if fabs(a) < 1.0 else fabs(a))
                status = 0 if converged else 1
                break

            a = a_new
            obj = obj_new
            if fabs(step) <= rel_tol * (1.0 if fabs(a) < 1.0 else fabs(a)):
                converged = True
                status = 0
                break

    if left_domain:
        return (a, iterations, False, obj, n_eff, STATUS_LEFT_DOMAIN)
    return (a, iterations, bool(converged), obj, n_eff, status)
