"""Pure numpy implementations of the numerical kernels.

Every function here has a twin with the same signature in the compiled
``_kernels`` extension.  Inputs are 1-D float64 arrays; outputs are fresh
arrays.  :mod:`billiardlab.kernels` picks one of the two at import time.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_MAX_ITER = 100


def trig_series(mean, a, b, x, nderiv):
    """Evaluate ``mean + sum a_n cos(n x) + b_n sin(n x)`` and derivatives.

    Returns an array of shape ``(nderiv + 1, len(x))``.
    """
    x = np.ascontiguousarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros((nderiv + 1, x.size))
    out[0] = mean
    if a.size == 0:
        return out
    n = np.arange(1, a.size + 1, dtype=float)
    nx = np.outer(x, n)
    c, s = np.cos(nx), np.sin(nx)
    even = c @ a + s @ b
    odd = s @ (a * n) - c @ (b * n)  # equals minus the first derivative
    out[0] += even
    if nderiv >= 1:
        out[1] = -odd
    if nderiv >= 2:
        out[2] = -(c @ (a * n**2) + s @ (b * n**2))
    if nderiv >= 3:
        out[3] = s @ (a * n**3) - c @ (b * n**3)
    return out


def support_gauge(mean, a, b, X, Y):
    """Gauge of the body with support function ``h`` at the points ``(X, Y)``.

    Solves ``psi + atan2(h'(psi), h(psi)) = atan2(Y, X)`` for the outer normal
    angle of the boundary point on the ray through ``(X, Y)``; the polar angle
    of that boundary point lies within a quarter turn of ``psi`` whenever
    ``h > 0``, which gives a bracket of width ``pi``.

    Returns ``(g, psi, h(psi))``.  At the origin ``g = 0`` and ``psi = nan``.
    """
    X = np.ascontiguousarray(X, dtype=float)
    Y = np.ascontiguousarray(Y, dtype=float)
    theta = np.arctan2(Y, X)
    zero = (X == 0.0) & (Y == 0.0)
    lo = theta - 0.5 * np.pi
    hi = theta + 0.5 * np.pi
    h0, h1, _ = trig_series(mean, a, b, theta, 2)
    psi = theta - np.arctan2(h1, h0)
    active = ~zero
    for _ in range(_MAX_ITER):
        if not active.any():
            break
        p = psi[active]
        v0, v1, v2 = trig_series(mean, a, b, p, 2)
        f = p + np.arctan2(v1, v0) - theta[active]
        df = v0 * (v0 + v2) / (v0 * v0 + v1 * v1)
        conv = np.abs(f) < 1e-15
        l, u = lo[active], hi[active]
        l = np.where(f < 0.0, p, l)
        u = np.where(f > 0.0, p, u)
        step = f / df
        new = p - step
        outside = (new <= l) | (new >= u) | ~np.isfinite(new)
        new = np.where(outside, 0.5 * (l + u), new)
        new = np.where(conv, p, new)
        lo[active], hi[active] = l, u
        psi[active] = new
        done = conv | (np.abs(new - p) < 1e-15 * (1.0 + np.abs(p)))
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    h = trig_series(mean, a, b, psi, 0)[0]
    g = (X * np.cos(psi) + Y * np.sin(psi)) / h
    g[zero] = 0.0
    psi[zero] = np.nan
    return g, psi, h


def polygon_gauge(normals, offsets, X, Y):
    """Gauge of a polygon given by outer edge normals and edge offsets.

    Returns ``(g, edge)`` where ``edge`` is the index of a maximizing edge.
    """
    normals = np.asarray(normals, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    vals = (np.outer(X, normals[:, 0]) + np.outer(Y, normals[:, 1])) / offsets
    edge = np.argmax(vals, axis=1)
    g = vals[np.arange(vals.shape[0]), edge]
    return g, edge


def _hermite(u, d, s0, s1, m0, m1):
    u2 = u * u
    u3 = u2 * u
    val = ((2 * u3 - 3 * u2 + 1) * s0 + (u3 - 2 * u2 + u) * d * m0
           + (-2 * u3 + 3 * u2) * s1 + (u3 - u2) * d * m1)
    der = ((6 * u2 - 6 * u) * s0 / d + (3 * u2 - 4 * u + 1) * m0
           + (-6 * u2 + 6 * u) * s1 / d + (3 * u2 - 2 * u) * m1)
    return val, der


def lift_eval(step, values, slopes, t):
    """Evaluate a periodic monotone lift stored on a uniform grid.

    ``values[j]`` is the lift at ``j * step`` for ``j = 0..M``; ``slopes`` has
    the same length.  The lift satisfies ``F(t + M step) = F(t) + values[M]``.
    Returns ``(F(t), F'(t))`` from piecewise cubic Hermite interpolation.
    """
    t = np.ascontiguousarray(t, dtype=float)
    M = values.size - 1
    period = M * step
    total = values[M]
    turns = np.floor(t / period)
    tau = t - turns * period
    j = np.minimum((tau / step).astype(np.int64), M - 1)
    j = np.maximum(j, 0)
    u = (tau - j * step) / step
    val, der = _hermite(u, step, values[j], values[j + 1], slopes[j], slopes[j + 1])
    return val + turns * total, der


def lift_invert(step, values, slopes, s):
    """Inverse of :func:`lift_eval`: returns ``t`` with ``F(t) = s``."""
    s = np.ascontiguousarray(s, dtype=float)
    M = values.size - 1
    total = values[M]
    turns = np.floor(s / total)
    r = s - turns * total
    j = np.searchsorted(values, r, side="right") - 1
    j = np.clip(j, 0, M - 1)
    s0, s1 = values[j], values[j + 1]
    m0, m1 = slopes[j], slopes[j + 1]
    lo = np.zeros_like(r)
    hi = np.ones_like(r)
    u = (r - s0) / (s1 - s0)
    for _ in range(_MAX_ITER):
        val, der = _hermite(u, step, s0, s1, m0, m1)
        f = val - r
        lo = np.where(f < 0.0, u, lo)
        hi = np.where(f > 0.0, u, hi)
        new = u - f / (der * step)
        bad = ((new <= lo) | (new >= hi) | ~np.isfinite(new)) & (f != 0.0)
        new = np.where(bad, 0.5 * (lo + hi), new)
        if np.all(np.abs(new - u) < 4e-16):
            u = new
            break
        u = new
    return (j + u) * step + turns * (M * step)
