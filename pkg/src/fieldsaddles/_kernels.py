"""Compiled inner loops: potential, derivatives and the Newton iteration.

Everything here works on a flat coordinate vector ``x`` of length ``3N``
laid out as ``(x_1, y_1, z_1, x_2, ...)``.  The public wrappers with input
validation live in :mod:`fieldsaddles.model` and :mod:`fieldsaddles.finder`.
"""

import numpy as np
from numba import njit

CONVERGED = 0
DIVERGED = 1
SINGULAR = 2
MAX_ITERS = 3

DIVERGENCE_BOUND = 1.0e3


@njit(cache=True)
def min_separation(x, n):
    """Smallest nucleus-electron or electron-electron distance."""
    best = np.inf
    for i in range(n):
        xi = x[3 * i]
        yi = x[3 * i + 1]
        zi = x[3 * i + 2]
        r = np.sqrt(xi * xi + yi * yi + zi * zi)
        if r < best:
            best = r
        for j in range(i + 1, n):
            dx = xi - x[3 * j]
            dy = yi - x[3 * j + 1]
            dz = zi - x[3 * j + 2]
            d = np.sqrt(dx * dx + dy * dy + dz * dz)
            if d < best:
                best = d
    return best


@njit(cache=True)
def energy(x, n, charge, field):
    attraction = 0.0
    repulsion = 0.0
    height = 0.0
    for i in range(n):
        xi = x[3 * i]
        yi = x[3 * i + 1]
        zi = x[3 * i + 2]
        attraction += 1.0 / np.sqrt(xi * xi + yi * yi + zi * zi)
        height += zi
        for j in range(i + 1, n):
            dx = xi - x[3 * j]
            dy = yi - x[3 * j + 1]
            dz = zi - x[3 * j + 2]
            repulsion += 1.0 / np.sqrt(dx * dx + dy * dy + dz * dz)
    return -charge * attraction + repulsion - field * height


@njit(cache=True)
def gradient_into(x, n, charge, field, g):
    g[:] = 0.0
    for i in range(n):
        xi = x[3 * i]
        yi = x[3 * i + 1]
        zi = x[3 * i + 2]
        ir = 1.0 / np.sqrt(xi * xi + yi * yi + zi * zi)
        c = charge * ir * ir * ir
        g[3 * i] += c * xi
        g[3 * i + 1] += c * yi
        g[3 * i + 2] += c * zi - field
        for j in range(i + 1, n):
            dx = xi - x[3 * j]
            dy = yi - x[3 * j + 1]
            dz = zi - x[3 * j + 2]
            id_ = 1.0 / np.sqrt(dx * dx + dy * dy + dz * dz)
            id3 = id_ * id_ * id_
            g[3 * i] -= dx * id3
            g[3 * i + 1] -= dy * id3
            g[3 * i + 2] -= dz * id3
            g[3 * j] += dx * id3
            g[3 * j + 1] += dy * id3
            g[3 * j + 2] += dz * id3


@njit(cache=True)
def grad_hess_into(x, n, charge, field, g, h):
    gradient_into(x, n, charge, field, g)
    h[:, :] = 0.0
    r = np.empty(3)
    d = np.empty(3)
    for i in range(n):
        for a in range(3):
            r[a] = x[3 * i + a]
        ir = 1.0 / np.sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
        ir3 = ir * ir * ir
        ir5 = 3.0 * ir3 * ir * ir
        for a in range(3):
            for b in range(3):
                # product of coordinates first so (a, b) and (b, a) round identically
                h[3 * i + a, 3 * i + b] -= charge * (r[a] * r[b]) * ir5
            h[3 * i + a, 3 * i + a] += charge * ir3
        for j in range(i + 1, n):
            for a in range(3):
                d[a] = r[a] - x[3 * j + a]
            id_ = 1.0 / np.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
            id3 = id_ * id_ * id_
            id5 = 3.0 * id3 * id_ * id_
            for a in range(3):
                for b in range(a, 3):
                    m = d[a] * d[b] * id5
                    if a == b:
                        m -= id3
                    h[3 * i + a, 3 * i + b] += m
                    h[3 * j + a, 3 * j + b] += m
                    h[3 * i + a, 3 * j + b] -= m
                    h[3 * j + a, 3 * i + b] -= m
                    if a != b:
                        h[3 * i + b, 3 * i + a] += m
                        h[3 * j + b, 3 * j + a] += m
                        h[3 * i + b, 3 * j + a] -= m
                        h[3 * j + b, 3 * i + a] -= m


@njit(cache=True)
def lu_solve(a, b, out):
    """Solve ``a @ out = b`` by Gaussian elimination with partial pivoting.

    ``a`` and ``b`` are overwritten.  Returns False when a pivot vanishes
    relative to the largest matrix entry.
    """
    m = a.shape[0]
    scale = 0.0
    for i in range(m):
        for j in range(m):
            v = abs(a[i, j])
            if v > scale:
                scale = v
    if not (scale > 0.0) or not np.isfinite(scale):
        return False
    tiny = 1.0e-14 * scale
    for k in range(m):
        p = k
        best = abs(a[k, k])
        for i in range(k + 1, m):
            v = abs(a[i, k])
            if v > best:
                best = v
                p = i
        if best <= tiny:
            return False
        if p != k:
            for j in range(m):
                t = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = t
            t = b[k]
            b[k] = b[p]
            b[p] = t
        piv = a[k, k]
        for i in range(k + 1, m):
            f = a[i, k] / piv
            if f != 0.0:
                for j in range(k + 1, m):
                    a[i, j] -= f * a[k, j]
                b[i] -= f * b[k]
    for i in range(m - 1, -1, -1):
        s = b[i]
        for j in range(i + 1, m):
            s -= a[i, j] * out[j]
        out[i] = s / a[i, i]
    return True


@njit(cache=True)
def newton(x, n, charge, field, tol, max_iters, clamp, guard):
    """Clamped Newton-Raphson on the gradient, in place on ``x``.

    Returns ``(status, iterations, residual)``.
    """
    m = 3 * n
    g = np.empty(m)
    h = np.empty((m, m))
    step = np.empty(m)
    res = np.inf
    for it in range(max_iters + 1):
        if min_separation(x, n) < guard:
            return SINGULAR, it, res
        grad_hess_into(x, n, charge, field, g, h)
        res = np.sqrt(np.sum(g * g))
        if not np.isfinite(res):
            return SINGULAR, it, res
        if res < tol:
            return CONVERGED, it, res
        if it == max_iters:
            break
        if not lu_solve(h, g, step):
            return SINGULAR, it, res
        for k in range(m):
            s = step[k]
            if s > clamp:
                s = clamp
            elif s < -clamp:
                s = -clamp
            x[k] -= s
            if not np.isfinite(x[k]) or abs(x[k]) > DIVERGENCE_BOUND:
                return DIVERGED, it + 1, res
    return MAX_ITERS, max_iters, res


@njit(cache=True)
def newton_batch(xs, n, charge, field, tol, max_iters, clamp, guard):
    """Run :func:`newton` on every row of ``xs`` (modified in place)."""
    count = xs.shape[0]
    status = np.empty(count, np.int64)
    iters = np.empty(count, np.int64)
    resid = np.empty(count)
    for b in range(count):
        s, it, r = newton(xs[b], n, charge, field, tol, max_iters, clamp, guard)
        status[b] = s
        iters[b] = it
        resid[b] = r
    return status, iters, resid
