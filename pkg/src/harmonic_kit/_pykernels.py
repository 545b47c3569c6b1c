"""Pure-Python/numpy implementations of the hot loops.

Mirrors ``_ckernels.pyx`` operation for operation so both backends return
bit-identical reconstruction results.
"""

import math

import numpy as np

CLIP = 0
TRANSLATE = 1

CONVERGED = 0
LINE_SEARCH_FAILED = 1
MAX_ITER = 2
SINGULAR = 3


def _as_grid(x, f):
    x = np.ascontiguousarray(x, dtype=np.float64)
    f = np.ascontiguousarray(f, dtype=np.float64)
    if x.shape != f.shape or x.ndim != 1:
        raise ValueError("grid and values must be 1-d arrays of equal length")
    return x, f


def second_differences(x, f):
    """Twice the second divided difference on every interior node."""
    x, f = _as_grid(x, f)
    h = np.diff(x)
    s = np.diff(f) / h
    return 2.0 * ((s[1:] - s[:-1]) / (h[:-1] + h[1:]))


def linear_midpoints(x, f):
    """Cubic Lagrange interpolant of each 4-point stencil at its central midpoint."""
    x, f = _as_grid(x, f)
    x1, x2, x3, x4 = x[:-3], x[1:-2], x[2:-1], x[3:]
    m = 0.5 * (x2 + x3)
    d1, d2, d3, d4 = m - x1, m - x2, m - x3, m - x4
    l1 = (d2 * d3 * d4) / ((x1 - x2) * (x1 - x3) * (x1 - x4))
    l2 = (d1 * d3 * d4) / ((x2 - x1) * (x2 - x3) * (x2 - x4))
    l3 = (d1 * d2 * d4) / ((x3 - x1) * (x3 - x2) * (x3 - x4))
    l4 = (d1 * d2 * d3) / ((x4 - x1) * (x4 - x2) * (x4 - x3))
    return ((l1 * f[:-3] + l2 * f[1:-2]) + l3 * f[2:-1]) + l4 * f[3:]


def decomposition(x, f):
    """Per-stencil ``(affine, coupling, w1, w2, d1, d2)`` arrays."""
    x, f = _as_grid(x, f)
    d = second_differences(x, f)
    h = np.diff(x)
    h1, h2, h3 = h[:-2], h[1:-1], h[2:]
    total = (h1 + h2) + h3
    w1 = (0.5 * h2 + h3) / total
    w2 = (h1 + 0.5 * h2) / total
    affine = 0.5 * (f[1:-2] + f[2:-1])
    coupling = -(h2 * h2) / 8.0
    return affine, coupling, w1, w2, d[:-1], d[1:]


def _ulp(v):
    return np.nextafter(v, np.inf) - v


def pph_midpoints(x, f, mode=CLIP, lam=2.0):
    """Nonlinear midpoint values: the arithmetic mean of the two indicators is
    replaced by the guarded weighted harmonic mean."""
    affine, coupling, w1, w2, d1, d2 = decomposition(x, f)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if mode == CLIP:
            pos = (d1 > 0.0) & (d2 > 0.0)
            neg = (d1 < 0.0) & (d2 < 0.0)
            hp = 1.0 / (w1 / d1 + w2 / d2)
            hn = -1.0 / (w1 / -d1 + w2 / -d2)
            mean = np.where(pos, hp, np.where(neg, hn, 0.0))
        else:
            big = np.maximum(np.abs(d1), np.abs(d2))
            shift = lam * big
            lowest = np.minimum(d1, d2)
            shift = np.where(shift + lowest <= 0.0, -lowest, shift)
            t = shift + _ulp(big)
            mean = 1.0 / (w1 / (d1 + t) + w2 / (d2 + t)) - t
    return affine + coupling * mean


def _residuals(x, b, h, cap_plane, cap_h, c):
    n = len(x)
    y = x[n - 1]
    r = [y - (b[i] * x[i] * x[i] + (h[i] - b[i]) * x[i]) for i in range(n - 1)]
    s = 0.0
    if cap_plane:
        for i in range(n - 1):
            s += x[i]
        r.append(y - cap_h * (1.0 - s))
    else:
        for i in range(n - 1):
            s += c[i] * x[i] * x[i] - (c[i] + cap_h) * x[i]
        r.append(y - (cap_h + s))
    return r


def _jacobian(x, b, h, cap_plane, cap_h, c):
    n = len(x)
    jac = [[0.0] * n for _ in range(n)]
    for i in range(n - 1):
        jac[i][i] = -(2.0 * b[i] * x[i] + h[i] - b[i])
        jac[n - 1][i] = cap_h if cap_plane else -(2.0 * c[i] * x[i] - c[i] - cap_h)
    for row in jac:
        row[n - 1] = 1.0
    return jac


def _solve(a, rhs):
    """Gaussian elimination with partial pivoting, in place; ``None`` if singular."""
    n = len(rhs)
    for k in range(n):
        p = k
        for i in range(k + 1, n):
            if abs(a[i][k]) > abs(a[p][k]):
                p = i
        if a[p][k] == 0.0:
            return None
        if p != k:
            a[k], a[p] = a[p], a[k]
            rhs[k], rhs[p] = rhs[p], rhs[k]
        piv = a[k][k]
        for i in range(k + 1, n):
            fac = a[i][k] / piv
            if fac != 0.0:
                row, top = a[i], a[k]
                for j in range(k, n):
                    row[j] -= fac * top[j]
                rhs[i] -= fac * rhs[k]
    for i in range(n - 1, -1, -1):
        t = rhs[i]
        for j in range(i + 1, n):
            t -= a[i][j] * rhs[j]
        rhs[i] = t / a[i][i]
        if not math.isfinite(rhs[i]):
            return None
    return rhs


def newton_surfaces(b, h, cap_plane, cap_h, c, x0, lo, hi, tol, step_tol, max_iter, max_halvings):
    """Damped, box-confined Newton on the prism surface system.

    Plain floats rather than numpy: the systems have at most a handful of
    unknowns, where array overhead dominates. Returns
    ``(x, iterations, residual, status)``.
    """
    b = [float(v) for v in b]
    h = [float(v) for v in h]
    c = [float(v) for v in c] if len(c) else [0.0] * len(b)
    lo = [float(v) for v in lo]
    hi = [float(v) for v in hi]
    x = [float(v) for v in x0]
    n = len(x)
    args = (b, h, bool(cap_plane), float(cap_h), c)
    r = _residuals(x, *args)
    res = max(abs(v) for v in r)
    if res <= tol:
        return np.array(x), 0, res, CONVERGED
    for it in range(1, max_iter + 1):
        dx = _solve(_jacobian(x, *args), [-v for v in r])
        if dx is None:
            return np.array(x), it, res, SINGULAR
        t = 1.0
        accepted = False
        for _ in range(max_halvings + 1):
            x_new = [x[i] + t * dx[i] for i in range(n)]
            if all(lo[i] <= x_new[i] <= hi[i] for i in range(n)):
                r_new = _residuals(x_new, *args)
                res_new = max(abs(v) for v in r_new)
                if res_new < res or res_new <= tol:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            return np.array(x), it, res, LINE_SEARCH_FAILED
        step = max(abs(x_new[i] - x[i]) for i in range(n))
        x, r, res = x_new, r_new, res_new
        if res <= tol and step <= step_tol:
            return np.array(x), it, res, CONVERGED
    return np.array(x), max_iter, res, MAX_ITER
