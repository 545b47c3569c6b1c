# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Same contract and operation order as ``_pykernels``."""

import numpy as np

from libc.math cimport fabs, nextafter, INFINITY, isfinite

cdef enum:
    MAXN = 64
    C_CLIP = 0
    C_TRANSLATE = 1
    C_CONVERGED = 0
    C_LINE_SEARCH_FAILED = 1
    C_MAX_ITER = 2
    C_SINGULAR = 3

CLIP = C_CLIP
TRANSLATE = C_TRANSLATE

CONVERGED = C_CONVERGED
LINE_SEARCH_FAILED = C_LINE_SEARCH_FAILED
MAX_ITER = C_MAX_ITER
SINGULAR = C_SINGULAR


def _as_grid(x, f):
    x = np.ascontiguousarray(x, dtype=np.float64)
    f = np.ascontiguousarray(f, dtype=np.float64)
    if x.shape != f.shape or x.ndim != 1:
        raise ValueError("grid and values must be 1-d arrays of equal length")
    return x, f


cdef inline double _dd2(const double[::1] x, const double[::1] f, Py_ssize_t j) nogil:
    cdef double ha = x[j] - x[j - 1]
    cdef double hb = x[j + 1] - x[j]
    cdef double sa = (f[j] - f[j - 1]) / ha
    cdef double sb = (f[j + 1] - f[j]) / hb
    return 2.0 * ((sb - sa) / (ha + hb))


def second_differences(x, f):
    x, f = _as_grid(x, f)
    cdef const double[::1] xv = x
    cdef const double[::1] fv = f
    cdef Py_ssize_t n = xv.shape[0], j
    out = np.empty(max(n - 2, 0))
    cdef double[::1] ov = out
    with nogil:
        for j in range(1, n - 1):
            ov[j - 1] = _dd2(xv, fv, j)
    return out


def linear_midpoints(x, f):
    x, f = _as_grid(x, f)
    cdef const double[::1] xv = x
    cdef const double[::1] fv = f
    cdef Py_ssize_t n = xv.shape[0], j
    cdef double x1, x2, x3, x4, m, d1, d2, d3, d4, l1, l2, l3, l4
    out = np.empty(max(n - 3, 0))
    cdef double[::1] ov = out
    with nogil:
        for j in range(n - 3):
            x1 = xv[j]; x2 = xv[j + 1]; x3 = xv[j + 2]; x4 = xv[j + 3]
            m = 0.5 * (x2 + x3)
            d1 = m - x1; d2 = m - x2; d3 = m - x3; d4 = m - x4
            l1 = (d2 * d3 * d4) / ((x1 - x2) * (x1 - x3) * (x1 - x4))
            l2 = (d1 * d3 * d4) / ((x2 - x1) * (x2 - x3) * (x2 - x4))
            l3 = (d1 * d2 * d4) / ((x3 - x1) * (x3 - x2) * (x3 - x4))
            l4 = (d1 * d2 * d3) / ((x4 - x1) * (x4 - x2) * (x4 - x3))
            ov[j] = ((l1 * fv[j] + l2 * fv[j + 1]) + l3 * fv[j + 2]) + l4 * fv[j + 3]
    return out


def decomposition(x, f):
    x, f = _as_grid(x, f)
    cdef const double[::1] xv = x
    cdef const double[::1] fv = f
    cdef Py_ssize_t n = xv.shape[0], j, m = max(n - 3, 0)
    cdef double h1, h2, h3, total
    affine = np.empty(m); coupling = np.empty(m)
    w1 = np.empty(m); w2 = np.empty(m); d1 = np.empty(m); d2 = np.empty(m)
    cdef double[::1] av = affine, cv = coupling, w1v = w1, w2v = w2, d1v = d1, d2v = d2
    with nogil:
        for j in range(m):
            h1 = xv[j + 1] - xv[j]
            h2 = xv[j + 2] - xv[j + 1]
            h3 = xv[j + 3] - xv[j + 2]
            total = (h1 + h2) + h3
            w1v[j] = (0.5 * h2 + h3) / total
            w2v[j] = (h1 + 0.5 * h2) / total
            av[j] = 0.5 * (fv[j + 1] + fv[j + 2])
            cv[j] = -(h2 * h2) / 8.0
            d1v[j] = _dd2(xv, fv, j + 1)
            d2v[j] = _dd2(xv, fv, j + 2)
    return affine, coupling, w1, w2, d1, d2


def pph_midpoints(x, f, int mode=C_CLIP, double lam=2.0):
    x, f = _as_grid(x, f)
    cdef const double[::1] xv = x
    cdef const double[::1] fv = f
    cdef Py_ssize_t n = xv.shape[0], j
    cdef double h1, h2, h3, total, w1, w2, a, c, d1, d2, mean, big, shift, lowest, t
    out = np.empty(max(n - 3, 0))
    cdef double[::1] ov = out
    with nogil:
        for j in range(n - 3):
            h1 = xv[j + 1] - xv[j]
            h2 = xv[j + 2] - xv[j + 1]
            h3 = xv[j + 3] - xv[j + 2]
            total = (h1 + h2) + h3
            w1 = (0.5 * h2 + h3) / total
            w2 = (h1 + 0.5 * h2) / total
            a = 0.5 * (fv[j + 1] + fv[j + 2])
            c = -(h2 * h2) / 8.0
            d1 = _dd2(xv, fv, j + 1)
            d2 = _dd2(xv, fv, j + 2)
            if mode == C_CLIP:
                if d1 > 0.0 and d2 > 0.0:
                    mean = 1.0 / (w1 / d1 + w2 / d2)
                elif d1 < 0.0 and d2 < 0.0:
                    mean = -1.0 / (w1 / -d1 + w2 / -d2)
                else:
                    mean = 0.0
            else:
                big = fabs(d1) if fabs(d1) >= fabs(d2) else fabs(d2)
                shift = lam * big
                lowest = d1 if d1 <= d2 else d2
                if shift + lowest <= 0.0:
                    shift = -lowest
                t = shift + (nextafter(big, INFINITY) - big)
                mean = 1.0 / (w1 / (d1 + t) + w2 / (d2 + t)) - t
            ov[j] = a + c * mean
    return out


# {{{ Newton on the prism surface system

cdef void _residuals(const double* x, int n, const double* b, const double* h,
                     bint cap_plane, double cap_h, const double* c, double* r) nogil:
    cdef int i
    cdef double y = x[n - 1], s = 0.0
    for i in range(n - 1):
        r[i] = y - (b[i] * x[i] * x[i] + (h[i] - b[i]) * x[i])
    if cap_plane:
        for i in range(n - 1):
            s += x[i]
        r[n - 1] = y - cap_h * (1.0 - s)
    else:
        for i in range(n - 1):
            s += c[i] * x[i] * x[i] - (c[i] + cap_h) * x[i]
        r[n - 1] = y - (cap_h + s)


cdef double _maxabs(const double* v, int n) nogil:
    cdef double m = 0.0
    cdef int i
    for i in range(n):
        if fabs(v[i]) > m:
            m = fabs(v[i])
    return m


cdef bint _solve(double* a, double* rhs, int n) nogil:
    """Gaussian elimination with partial pivoting; ``a`` is row-major, overwritten."""
    cdef int i, j, k, p
    cdef double piv, tmp, fac
    for k in range(n):
        p = k
        for i in range(k + 1, n):
            if fabs(a[i * n + k]) > fabs(a[p * n + k]):
                p = i
        if a[p * n + k] == 0.0:
            return False
        if p != k:
            for j in range(n):
                tmp = a[k * n + j]; a[k * n + j] = a[p * n + j]; a[p * n + j] = tmp
            tmp = rhs[k]; rhs[k] = rhs[p]; rhs[p] = tmp
        piv = a[k * n + k]
        for i in range(k + 1, n):
            fac = a[i * n + k] / piv
            if fac != 0.0:
                for j in range(k, n):
                    a[i * n + j] -= fac * a[k * n + j]
                rhs[i] -= fac * rhs[k]
    for i in range(n - 1, -1, -1):
        tmp = rhs[i]
        for j in range(i + 1, n):
            tmp -= a[i * n + j] * rhs[j]
        rhs[i] = tmp / a[i * n + i]
        if not isfinite(rhs[i]):
            return False
    return True


def newton_surfaces(b, h, bint cap_plane, double cap_h, c, x0, lo, hi,
                    double tol, double step_tol, int max_iter, int max_halvings):
    cdef int n = len(x0)
    if n > MAXN:
        raise ValueError(f"compiled Newton supports n <= {MAXN}")
    cdef double bb[MAXN]
    cdef double hh[MAXN]
    cdef double cc[MAXN]
    cdef double lov[MAXN]
    cdef double hiv[MAXN]
    cdef double x[MAXN]
    cdef double xn[MAXN]
    cdef double r[MAXN]
    cdef double rn[MAXN]
    cdef double dx[MAXN]
    cdef double jac[MAXN * MAXN]
    cdef int i, it, k, status = C_MAX_ITER, iters = max_iter
    cdef double res, res_new, t, step
    cdef bint inside, accepted
    for i in range(n - 1):
        bb[i] = b[i]
        hh[i] = h[i]
        cc[i] = c[i] if len(c) else 0.0
    for i in range(n):
        x[i] = x0[i]
        lov[i] = lo[i]
        hiv[i] = hi[i]
    with nogil:
        _residuals(x, n, bb, hh, cap_plane, cap_h, cc, r)
        res = _maxabs(r, n)
        if res <= tol:
            status = C_CONVERGED
            iters = 0
        else:
            for it in range(1, max_iter + 1):
                for i in range(n * n):
                    jac[i] = 0.0
                for i in range(n - 1):
                    jac[i * n + i] = -(2.0 * bb[i] * x[i] + hh[i] - bb[i])
                    jac[(n - 1) * n + i] = cap_h if cap_plane else -(2.0 * cc[i] * x[i] - cc[i] - cap_h)
                for i in range(n):
                    jac[i * n + n - 1] = 1.0
                    dx[i] = -r[i]
                if not _solve(jac, dx, n):
                    status = C_SINGULAR
                    iters = it
                    break
                t = 1.0
                accepted = False
                for k in range(max_halvings + 1):
                    inside = True
                    for i in range(n):
                        xn[i] = x[i] + t * dx[i]
                        if xn[i] < lov[i] or xn[i] > hiv[i]:
                            inside = False
                    if inside:
                        _residuals(xn, n, bb, hh, cap_plane, cap_h, cc, rn)
                        res_new = _maxabs(rn, n)
                        if res_new < res or res_new <= tol:
                            accepted = True
                            break
                    t *= 0.5
                if not accepted:
                    status = C_LINE_SEARCH_FAILED
                    iters = it
                    break
                step = 0.0
                for i in range(n):
                    if fabs(xn[i] - x[i]) > step:
                        step = fabs(xn[i] - x[i])
                    x[i] = xn[i]
                    r[i] = rn[i]
                res = res_new
                if res <= tol and step <= step_tol:
                    status = C_CONVERGED
                    iters = it
                    break
    out = np.empty(n)
    for i in range(n):
        out[i] = x[i]
    return out, iters, res, status

# }}}
