# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels.

Same signatures and semantics as ``_kernels_py``; see that module for the
description of each routine.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, atan2, floor, fabs, M_PI, NAN

cnp.import_array()

BACKEND = "cython"

cdef int _MAX_ITER = 100


cdef inline void _series(double mean, const double[::1] a, const double[::1] b,
                         double x, int nderiv, double* out) noexcept nogil:
    cdef Py_ssize_t n, N = a.shape[0]
    cdef double c1 = cos(x), s1 = sin(x)
    cdef double cn = 1.0, sn = 0.0, tmp, fn, ev, od
    out[0] = mean
    out[1] = 0.0
    out[2] = 0.0
    out[3] = 0.0
    for n in range(N):
        tmp = cn * c1 - sn * s1
        sn = sn * c1 + cn * s1
        cn = tmp
        fn = <double>(n + 1)
        ev = a[n] * cn + b[n] * sn
        od = a[n] * sn - b[n] * cn
        out[0] += ev
        if nderiv >= 1:
            out[1] -= fn * od
        if nderiv >= 2:
            out[2] -= fn * fn * ev
        if nderiv >= 3:
            out[3] += fn * fn * fn * od


def trig_series(double mean, a, b, x, int nderiv):
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t i, j, m = xv.shape[0]
    out = np.zeros((nderiv + 1, m))
    cdef double[:, ::1] ov = out
    cdef double buf[4]
    with nogil:
        for i in range(m):
            _series(mean, av, bv, xv[i], nderiv, buf)
            for j in range(nderiv + 1):
                ov[j, i] = buf[j]
    return out


def support_gauge(double mean, a, b, X, Y):
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t i, m = xv.shape[0]
    cdef int it
    g = np.empty(m)
    psi = np.empty(m)
    hh = np.empty(m)
    cdef double[::1] gv = g, pv = psi, hv = hh
    cdef double buf[4]
    cdef double theta, lo, hi, p, f, df, new
    with nogil:
        for i in range(m):
            if xv[i] == 0.0 and yv[i] == 0.0:
                gv[i] = 0.0
                pv[i] = NAN
                _series(mean, av, bv, 0.0, 0, buf)
                hv[i] = buf[0]
                continue
            theta = atan2(yv[i], xv[i])
            lo = theta - 0.5 * M_PI
            hi = theta + 0.5 * M_PI
            _series(mean, av, bv, theta, 2, buf)
            p = theta - atan2(buf[1], buf[0])
            for it in range(_MAX_ITER):
                _series(mean, av, bv, p, 2, buf)
                f = p + atan2(buf[1], buf[0]) - theta
                df = buf[0] * (buf[0] + buf[2]) / (buf[0] * buf[0] + buf[1] * buf[1])
                if fabs(f) < 1e-15:
                    break
                if f < 0.0:
                    lo = p
                elif f > 0.0:
                    hi = p
                new = p - f / df
                if not (new > lo and new < hi):
                    new = 0.5 * (lo + hi)
                if fabs(new - p) < 1e-15 * (1.0 + fabs(p)):
                    p = new
                    break
                p = new
            _series(mean, av, bv, p, 0, buf)
            pv[i] = p
            hv[i] = buf[0]
            gv[i] = (xv[i] * cos(p) + yv[i] * sin(p)) / buf[0]
    return g, psi, hh


def polygon_gauge(normals, offsets, X, Y):
    cdef const double[:, ::1] nv = np.ascontiguousarray(normals, dtype=np.float64)
    cdef const double[::1] ov = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t i, e, m = xv.shape[0], ne = ov.shape[0]
    g = np.empty(m)
    edge = np.empty(m, dtype=np.int64)
    cdef double[::1] gv = g
    cdef long long[::1] ev = edge
    cdef double best, val
    cdef long long arg
    with nogil:
        for i in range(m):
            best = -1e308
            arg = 0
            for e in range(ne):
                val = (nv[e, 0] * xv[i] + nv[e, 1] * yv[i]) / ov[e]
                if val > best:
                    best = val
                    arg = e
            gv[i] = best
            ev[i] = arg
    return g, edge


cdef inline void _hermite(double u, double d, double s0, double s1,
                          double m0, double m1, double* val, double* der) noexcept nogil:
    cdef double u2 = u * u, u3 = u * u * u
    val[0] = ((2 * u3 - 3 * u2 + 1) * s0 + (u3 - 2 * u2 + u) * d * m0
              + (-2 * u3 + 3 * u2) * s1 + (u3 - u2) * d * m1)
    der[0] = ((6 * u2 - 6 * u) * s0 / d + (3 * u2 - 4 * u + 1) * m0
              + (-6 * u2 + 6 * u) * s1 / d + (3 * u2 - 2 * u) * m1)


def lift_eval(double step, values, slopes, t):
    cdef const double[::1] sv = np.ascontiguousarray(values, dtype=np.float64)
    cdef const double[::1] mv = np.ascontiguousarray(slopes, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef Py_ssize_t i, j, n = tv.shape[0], M = sv.shape[0] - 1
    cdef double period = M * step, total = sv[M], turns, tau, u, val, der
    out = np.empty(n)
    dout = np.empty(n)
    cdef double[::1] ov = out, dv = dout
    with nogil:
        for i in range(n):
            turns = floor(tv[i] / period)
            tau = tv[i] - turns * period
            j = <Py_ssize_t>(tau / step)
            if j > M - 1:
                j = M - 1
            if j < 0:
                j = 0
            u = (tau - j * step) / step
            _hermite(u, step, sv[j], sv[j + 1], mv[j], mv[j + 1], &val, &der)
            ov[i] = val + turns * total
            dv[i] = der
    return out, dout


def lift_invert(double step, values, slopes, s):
    cdef const double[::1] sv = np.ascontiguousarray(values, dtype=np.float64)
    cdef const double[::1] mv = np.ascontiguousarray(slopes, dtype=np.float64)
    cdef const double[::1] qv = np.ascontiguousarray(s, dtype=np.float64)
    cdef Py_ssize_t i, j, lo_j, hi_j, mid, n = qv.shape[0], M = sv.shape[0] - 1
    cdef double total = sv[M], turns, r, u, lo, hi, val, der, f, new
    cdef int it
    out = np.empty(n)
    cdef double[::1] ov = out
    with nogil:
        for i in range(n):
            turns = floor(qv[i] / total)
            r = qv[i] - turns * total
            lo_j = 0
            hi_j = M
            while hi_j - lo_j > 1:
                mid = (lo_j + hi_j) // 2
                if sv[mid] <= r:
                    lo_j = mid
                else:
                    hi_j = mid
            j = lo_j
            lo = 0.0
            hi = 1.0
            u = (r - sv[j]) / (sv[j + 1] - sv[j])
            for it in range(_MAX_ITER):
                _hermite(u, step, sv[j], sv[j + 1], mv[j], mv[j + 1], &val, &der)
                f = val - r
                if f == 0.0:
                    break
                if f < 0.0:
                    lo = u
                elif f > 0.0:
                    hi = u
                new = u - f / (der * step)
                if not (new > lo and new < hi):
                    new = 0.5 * (lo + hi)
                if fabs(new - u) < 4e-16:
                    u = new
                    break
                u = new
            ov[i] = (j + u) * step + turns * (M * step)
    return out
