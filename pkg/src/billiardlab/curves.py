"""Convex curves, their parametrizations and gauge bodies.

Conventions
-----------
Planar vectors are the last axis of an array, so a batch of points has shape
``(..., 2)``.  Curve evaluators accept parameter arrays of any shape and
return ``t.shape + (2,)``.  ``[u, v]`` denotes the determinant ``u_x v_y -
u_y v_x``.  Curves are positively oriented (counterclockwise).

A convex body ``K`` with the origin in its interior is encoded by its gauge
``g_K(x) = inf{r > 0 : x in rK}`` together with a boundary parametrization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import ConvexityError, PreconditionError, SpecError

N_MAX = 64
TAGS = ("normal-angle", "euclidean-arc", "affine-normalized", "gauge-arc", "custom")

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def det2(u, v):
    """Determinant ``[u, v]`` over the last axis."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def dot2(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1]


def unit(psi):
    """``(cos psi, sin psi)`` stacked on a trailing axis."""
    psi = np.asarray(psi, dtype=float)
    return np.stack([np.cos(psi), np.sin(psi)], axis=-1)


def unit_perp(psi):
    """``(-sin psi, cos psi)``: the unit normal rotated a quarter turn."""
    psi = np.asarray(psi, dtype=float)
    return np.stack([-np.sin(psi), np.cos(psi)], axis=-1)


def rotation_matrix(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def apply(matrix, x):
    """Apply a 2x2 matrix to a batch of vectors of shape ``(..., 2)``."""
    return np.asarray(x, dtype=float) @ np.asarray(matrix, dtype=float).T


# ---------------------------------------------------------------------------
# Support-function curves


@dataclass(frozen=True, eq=False)
class SupportCurve:
    """Strictly convex curve given by a truncated Fourier support function.

    ``h(psi) = mean + sum_n cos_coeffs[n-1] cos(n psi) + sin_coeffs[n-1] sin(n psi)``

    The boundary point with outer normal angle ``psi`` is
    ``h n(psi) + h'(psi) n_perp(psi)``; its radius of curvature is ``h + h''``,
    which must be positive at every one of ``grid_size`` samples.

    Parameters
    ----------
    mean : float
    cos_coeffs, sin_coeffs : array_like
        Coefficients of orders ``1..N``; the shorter list is zero padded.
        ``N`` may not exceed :data:`N_MAX`.
    grid_size : int
        Number of equispaced samples used for the convexity check.
    """

    mean: float
    cos_coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sin_coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    grid_size: int = 4096

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.cos_coeffs, dtype=float)).ravel()
        b = np.atleast_1d(np.asarray(self.sin_coeffs, dtype=float)).ravel()
        n = max(a.size, b.size)
        if n > N_MAX:
            raise SpecError(f"support function has {n} harmonics; at most {N_MAX} allowed")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.isfinite(self.mean)):
            raise SpecError("support function coefficients must be finite")
        a = np.pad(a, (0, n - a.size))
        b = np.pad(b, (0, n - b.size))
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "cos_coeffs", a)
        object.__setattr__(self, "sin_coeffs", b)
        if int(self.grid_size) < 8:
            raise SpecError("grid_size must be at least 8")
        object.__setattr__(self, "grid_size", int(self.grid_size))
        # the grid must resolve the highest harmonic
        m = max(self.grid_size, 16 * max(n, 1))
        margin = float(np.min(self.radius_of_curvature(np.linspace(0, 2 * np.pi, m, endpoint=False))))
        if not margin > 0:
            raise ConvexityError(
                f"h + h'' reaches {margin:.6g} <= 0: support function is not strictly convex")
        object.__setattr__(self, "_margin", margin)

    @property
    def order(self) -> int:
        return int(self.cos_coeffs.size)

    @property
    def convexity_margin(self) -> float:
        """Minimum of ``h + h''`` over the check grid."""
        return self._margin

    def derivatives(self, psi, nderiv=3):
        """Array of shape ``(nderiv + 1,) + psi.shape`` holding ``h, h', ...``."""
        psi = np.asarray(psi, dtype=float)
        out = kernels.trig_series(self.mean, self.cos_coeffs, self.sin_coeffs,
                                  psi.ravel(), nderiv)
        return out.reshape((nderiv + 1,) + psi.shape)

    def support(self, psi):
        return self.derivatives(psi, 0)[0]

    def radius_of_curvature(self, psi):
        h = self.derivatives(psi, 2)
        return h[0] + h[2]

    def point(self, psi):
        h = self.derivatives(psi, 1)
        return h[0][..., None] * unit(psi) + h[1][..., None] * unit_perp(psi)

    def as_param_curve(self, body=None) -> "ParamCurve":
        """The boundary parametrized by the outer normal angle."""

        def pos(psi):
            h = self.derivatives(psi, 1)
            return h[0][..., None] * unit(psi) + h[1][..., None] * unit_perp(psi)

        def d1(psi):
            h = self.derivatives(psi, 2)
            return (h[0] + h[2])[..., None] * unit_perp(psi)

        def d2(psi):
            h = self.derivatives(psi, 3)
            return (h[1] + h[3])[..., None] * unit_perp(psi) - (h[0] + h[2])[..., None] * unit(psi)

        return ParamCurve(2 * np.pi, pos, d1, d2, tag="normal-angle", body=body)

    def to_dict(self):
        return {"type": "support_fourier", "mean": self.mean,
                "cos": self.cos_coeffs.tolist(), "sin": self.sin_coeffs.tolist()}


def eval_support_curve(curve: SupportCurve, psi):
    """Boundary point of ``curve`` with outer normal angle ``psi``."""
    return curve.point(psi)


def width(curve, theta):
    """Width ``h(theta) + h(theta + pi)`` of a body with a ``support`` method."""
    theta = np.asarray(theta, dtype=float)
    return curve.support(theta) + curve.support(theta + np.pi)


# ---------------------------------------------------------------------------
# Parametrized curves


@dataclass(frozen=True, eq=False)
class ParamCurve:
    """Closed convex curve with an explicit periodic parametrization.

    Parameters
    ----------
    period : float
        Parameter period ``L``.
    position_fn, d1_fn, d2_fn : callable
        ``t -> gamma(t)``, ``gamma'(t)`` and ``gamma''(t)`` for array ``t``.
    tag : str
        One of :data:`TAGS`.
    body : GaugeBody, optional
        The body used for a gauge-arc parametrization.
    scale : float
        Homothety factor relative to the curve it was derived from.
    check : bool
        Verify periodicity and orientation on 64 samples.
    jet_fn : callable, optional
        Scalar ``t -> (x, y, x', y', x'', y'')`` as Python floats; a fast path
        for sequential iteration.
    """

    period: float
    position_fn: Callable
    d1_fn: Callable
    d2_fn: Callable
    tag: str = "custom"
    body: object = None
    scale: float = 1.0
    check: bool = True
    jet_fn: Optional[Callable] = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise SpecError(f"unknown parametrization tag {self.tag!r}")
        if not self.period > 0:
            raise SpecError("period must be positive")
        object.__setattr__(self, "period", float(self.period))
        if self.check:
            t = np.linspace(0, self.period, 64, endpoint=False) + 0.1234 * self.period / 64
            p0, p1 = self.position(t), self.position(t + self.period)
            size = np.max(np.abs(p0))
            if np.max(np.abs(p1 - p0)) > 1e-8 * max(size, 1.0):
                raise ConvexityError("curve is not periodic with the stated period")
            v, a = self.d1(t), self.d2(t)
            turn = det2(v, a)
            if np.any(turn < -1e-9 * np.maximum(dot2(v, v), 1e-300) ** 1.5 / max(size, 1e-300)):
                raise ConvexityError("curve is not convex and positively oriented")

    def position(self, t):
        return self.position_fn(np.asarray(t, dtype=float))

    def d1(self, t):
        return self.d1_fn(np.asarray(t, dtype=float))

    def d2(self, t):
        return self.d2_fn(np.asarray(t, dtype=float))

    def jet(self, t):
        """Position and derivatives at a scalar ``t`` as a 6-tuple of floats."""
        if self.jet_fn is not None:
            return self.jet_fn(float(t))
        t = np.array([float(t)])
        p, v, a = self.position(t)[0], self.d1(t)[0], self.d2(t)[0]
        return (float(p[0]), float(p[1]), float(v[0]), float(v[1]), float(a[0]), float(a[1]))

    def sample(self, n):
        t = np.arange(n) * (self.period / n)
        return t, self.position(t)

    def area(self, n=4096):
        """Enclosed area ``(1/2) int [gamma, gamma']`` (trapezoid, spectral for smooth curves)."""
        t = np.arange(n) * (self.period / n)
        return 0.5 * float(np.sum(det2(self.position(t), self.d1(t)))) * self.period / n

    def transformed(self, matrix, tag="custom") -> "ParamCurve":
        """The image curve ``A gamma(t)`` (same parameter)."""
        A = np.asarray(matrix, dtype=float)
        if np.linalg.det(A) <= 0:
            raise SpecError("only orientation preserving linear maps keep the curve oriented")
        return ParamCurve(self.period, lambda t: apply(A, self.position(t)),
                          lambda t: apply(A, self.d1(t)), lambda t: apply(A, self.d2(t)),
                          tag=tag, scale=self.scale)

    @cached_property
    def _angle_table(self):
        n = 2048
        t = np.arange(n + 1) * (self.period / n)
        p = self.position(t)
        ang = np.unwrap(np.arctan2(p[:, 1], p[:, 0]))
        if not np.all(np.diff(ang) > 0):
            raise PreconditionError("origin is not interior to the curve")
        if abs(ang[-1] - ang[0] - 2 * np.pi) > 1e-6:
            raise PreconditionError("curve does not wind once around the origin")
        return t, ang

    def locate(self, points, tol=1e-14):
        """Parameters ``t`` in ``[0, period)`` with ``gamma(t)`` on the ray through ``points``.

        For a point on the curve this inverts the parametrization.  The polar
        angle of ``gamma(t)`` is strictly increasing because the origin is
        interior, so a safeguarded Newton iteration on it converges.
        """
        points = np.asarray(points, dtype=float)
        shape = points.shape[:-1]
        pts = points.reshape(-1, 2)
        tt, ang = self._angle_table
        target = np.arctan2(pts[:, 1], pts[:, 0])
        target = ang[0] + np.mod(target - ang[0], 2 * np.pi)
        j = np.clip(np.searchsorted(ang, target, side="right") - 1, 0, tt.size - 2)
        lo, hi = tt[j].copy(), tt[j + 1].copy()
        t = lo + (hi - lo) * (target - ang[j]) / (ang[j + 1] - ang[j])
        for _ in range(60):
            p, v = self.position(t), self.d1(t)
            cur = np.arctan2(p[:, 1], p[:, 0])
            f = np.mod(cur - target + np.pi, 2 * np.pi) - np.pi
            dfdt = det2(p, v) / dot2(p, p)
            lo = np.where(f < 0, t, lo)
            hi = np.where(f > 0, t, hi)
            new = t - f / dfdt
            bad = (new <= lo) | (new >= hi) | ~np.isfinite(new)
            new = np.where(bad & (f != 0), 0.5 * (lo + hi), np.where(f == 0, t, new))
            done = np.all(np.abs(new - t) <= tol * self.period)
            t = new
            if done:
                break
        return np.mod(t, self.period).reshape(shape)


class PeriodicLift:
    """Monotone lift ``F(t) = int_0^t sigma`` of a positive ``P``-periodic speed.

    ``sigma`` is integrated with 8-point Gauss-Legendre on ``cells`` uniform
    cells; between grid points ``F`` is the cubic Hermite interpolant using the
    exact values of ``sigma`` as slopes.  ``F(t + P) = F(t) + total``.
    """

    def __init__(self, speed, period, cells=4096):
        self.period = float(period)
        self.step = self.period / cells
        grid = np.arange(cells + 1) * self.step
        nodes = grid[:-1, None] + 0.5 * (_GL_NODES + 1.0) * self.step
        vals = np.asarray(speed(nodes.ravel()), dtype=float).reshape(cells, _GL_NODES.size)
        slopes = np.asarray(speed(grid), dtype=float)
        low = min(float(vals.min()), float(slopes.min()))
        if not low > 0:
            raise PreconditionError(f"speed must be positive; minimum sample is {low:.6g}")
        self.min_speed = low
        inc = vals @ _GL_WEIGHTS * (0.5 * self.step)
        # accumulate deviations from the mean increment to limit rounding drift
        total = math.fsum(inc)
        mean = total / cells
        self.values = np.arange(cells + 1) * mean + np.concatenate([[0.0], np.cumsum(inc - mean)])
        self.values[-1] = total
        slopes[-1] = slopes[0]
        self.slopes = slopes
        self.total = float(self.values[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        v, _ = kernels.lift_eval(self.step, self.values, self.slopes, t.ravel())
        return v.reshape(t.shape)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        _, d = kernels.lift_eval(self.step, self.values, self.slopes, t.ravel())
        return d.reshape(t.shape)

    def inverse(self, s):
        s = np.asarray(s, dtype=float)
        return kernels.lift_invert(self.step, self.values, self.slopes, s.ravel()).reshape(s.shape)


def _reparametrize(curve, sigma, dsigma, scaling, tag, body=None, cells=4096):
    """Curve ``c gamma(u(s))`` with ``s = kappa F(u)`` and ``F' = sigma``.

    ``scaling`` maps the total ``F(L)`` to the pair ``(kappa, c)``.
    """
    lift = PeriodicLift(sigma, curve.period, cells)
    kappa, c = scaling(lift.total)

    def u_of(s):
        return lift.inverse(s / kappa)

    def pos(s):
        return c * curve.position(u_of(s))

    def d1(s):
        u = u_of(s)
        return (c / (kappa * sigma(u)))[..., None] * curve.d1(u)

    def d2(s):
        u = u_of(s)
        sg = sigma(u)
        g1 = curve.d1(u)
        return (c / (kappa * sg) ** 2)[..., None] * (curve.d2(u) - (dsigma(u) / sg)[..., None] * g1)

    out = ParamCurve(kappa * lift.total, pos, d1, d2, tag=tag, body=body,
                     scale=curve.scale * c)
    object.__setattr__(out, "lift", lift)
    return out


def _unit_scaling(total):
    return 1.0, 1.0


def arc_length_reparametrize(curve: ParamCurve) -> ParamCurve:
    """Euclidean arc-length parametrization of the same curve."""
    if curve.tag == "euclidean-arc":
        return curve

    def sigma(u):
        v = curve.d1(u)
        return np.hypot(v[..., 0], v[..., 1])

    def dsigma(u):
        v, a = curve.d1(u), curve.d2(u)
        return dot2(v, a) / np.hypot(v[..., 0], v[..., 1])

    return _reparametrize(curve, sigma, dsigma, _unit_scaling, "euclidean-arc")


def gauge_arc_reparametrize(curve: ParamCurve, body: "GaugeBody") -> ParamCurve:
    """Parametrization with ``g_K(gamma'(t)) = 1``; the period is the gauge perimeter."""
    if curve.tag == "gauge-arc" and curve.body is body:
        return curve

    def sigma(u):
        return body.gauge(curve.d1(u))

    def dsigma(u):
        return body.gauge_differential(curve.d1(u), curve.d2(u))

    return _reparametrize(curve, sigma, dsigma, _unit_scaling, "gauge-arc", body=body)


def affine_normalize(curve: ParamCurve) -> ParamCurve:
    """Homothetic copy with ``[gamma, gamma'] = 1`` and period ``2 pi``.

    The homothety factor ``sqrt(pi / area)`` is stored in ``scale``
    (multiplied by the input's own scale).
    """

    def sigma(u):
        return det2(curve.position(u), curve.d1(u))

    def dsigma(u):
        return det2(curve.position(u), curve.d2(u))

    t = np.linspace(0, curve.period, 512, endpoint=False)
    if not np.all(sigma(t) > 0):
        raise PreconditionError("origin is not interior: [gamma, gamma'] changes sign")

    def scaling(total):
        # total = 2 * area; the new period 2 pi fixes kappa = pi / area = c^2
        kappa = 2 * np.pi / total
        return kappa, np.sqrt(kappa)

    return _reparametrize(curve, sigma, dsigma, scaling, "affine-normalized")


@dataclass(frozen=True, eq=False)
class ODESolution:
    """Increasing ``f`` with ``a f'(s) = G(f(s))`` and ``f(s + P) = f(s) + P``.

    ``f(0) = 0``.  Built from the lift ``F(t) = int_0^t dt / G`` through
    ``f(s) = F^{-1}(s / a)``.
    """

    a: float
    period: float
    lift: PeriodicLift
    G: Callable

    def __call__(self, s):
        return self.lift.inverse(np.asarray(s, dtype=float) / self.a)

    def derivative(self, s):
        # from the interpolant, so that a f' - G(f) measures the actual error
        return 1.0 / (self.a * self.lift.derivative(self(s)))


def solve_periodic_ode(G, P, cells=4096):
    """Solve ``a f'(s) = G(f(s))`` with ``f(s + P) = f(s) + P``.

    The constant follows from separation of variables,
    ``a = P / int_0^P dt / G(t)``, and ``f`` is the inverse of the lift of
    ``1 / G`` scaled by ``a``.

    Returns
    -------
    a : float
    f : ODESolution
    """
    P = float(P)
    if not P > 0:
        raise PreconditionError("period must be positive")
    probe = np.asarray(G(np.linspace(0, P, 8 * cells, endpoint=False)), dtype=float)
    if not np.all(probe > 0):
        raise PreconditionError(f"G must be positive; minimum sample is {probe.min():.6g}")
    lift = PeriodicLift(lambda t: 1.0 / np.asarray(G(t), dtype=float), P, cells)
    a = P / lift.total
    return a, ODESolution(a, P, lift, G)


# ---------------------------------------------------------------------------
# Gauge bodies


class GaugeBody:
    """Convex body with the origin in its interior.

    Subclasses implement :meth:`gauge`, :meth:`gradient` and :meth:`boundary`.
    ``smooth`` is ``False`` for bodies whose gauge has corners, which are
    confined to perimeter arithmetic.
    """

    smooth = True
    symmetry_hint = None

    def gauge(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def gauge_differential(self, x, v):
        return dot2(self.gradient(x), v)

    def boundary(self) -> ParamCurve:
        raise NotImplementedError

    def contains(self, x, tol=0.0):
        return self.gauge(x) <= 1.0 + tol

    def to_dict(self):
        raise NotImplementedError


def gauge(body: GaugeBody, x):
    """Gauge ``g_K(x)``; zero at the origin."""
    return body.gauge(np.asarray(x, dtype=float))


def gauge_differential(body: GaugeBody, x, v):
    """Directional derivative of the gauge at ``x`` along ``v``."""
    x = np.asarray(x, dtype=float)
    if np.any(np.all(x == 0.0, axis=-1)):
        raise PreconditionError("the gauge is not differentiable at the origin")
    return body.gauge_differential(x, np.asarray(v, dtype=float))


def _flat(x):
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, 2), x.shape[:-1]


class SupportBody(GaugeBody):
    """Smooth body bounded by a :class:`SupportCurve` (requires ``h > 0``)."""

    def __init__(self, curve: SupportCurve):
        self.curve = curve
        psi = np.linspace(0, 2 * np.pi, max(curve.grid_size, 16 * max(curve.order, 1)),
                          endpoint=False)
        if not np.min(curve.support(psi)) > 0:
            raise ConvexityError("origin is not interior: support function is not positive")

    def _solve(self, x):
        pts, shape = _flat(x)
        c = self.curve
        g, psi, h = kernels.support_gauge(c.mean, c.cos_coeffs, c.sin_coeffs, pts[:, 0], pts[:, 1])
        return g.reshape(shape), psi.reshape(shape), h.reshape(shape)

    def gauge(self, x):
        return self._solve(x)[0]

    def gradient(self, x):
        _, psi, h = self._solve(x)
        return unit(psi) / h[..., None]

    def support(self, psi):
        return self.curve.support(psi)

    def boundary(self):
        return self.curve.as_param_curve(body=self)

    def to_dict(self):
        return self.curve.to_dict()


class EllipseBody(GaugeBody):
    """Axis-parallel ellipse with semi-axes ``a``, ``b`` centred at the origin."""

    def __init__(self, a, b):
        if not (a > 0 and b > 0):
            raise SpecError("ellipse semi-axes must be positive")
        self.a, self.b = float(a), float(b)

    def gauge(self, x):
        x = np.asarray(x, dtype=float)
        return np.hypot(x[..., 0] / self.a, x[..., 1] / self.b)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        g = self.gauge(x)
        return np.stack([x[..., 0] / self.a**2, x[..., 1] / self.b**2], axis=-1) / g[..., None]

    def support(self, psi):
        psi = np.asarray(psi, dtype=float)
        return np.hypot(self.a * np.cos(psi), self.b * np.sin(psi))

    def boundary(self):
        a, b = self.a, self.b
        if a == b:
            # a circle parametrized by arc length
            def jet(s):
                c, n = math.cos(s / a), math.sin(s / a)
                return (a * c, a * n, -n, c, -c / a, -n / a)

            return ParamCurve(
                2 * np.pi * a,
                lambda s: a * unit(s / a),
                lambda s: unit_perp(s / a),
                lambda s: -unit(s / a) / a,
                tag="euclidean-arc", body=self, jet_fn=jet)

        def jet(t):
            c, n = math.cos(t), math.sin(t)
            return (a * c, b * n, -a * n, b * c, -a * c, -b * n)

        D = np.array([a, b])
        return ParamCurve(2 * np.pi, lambda t: D * unit(t), lambda t: D * unit_perp(t),
                          lambda t: -D * unit(t), tag="custom", body=self, jet_fn=jet)

    def to_dict(self):
        return {"type": "ellipse", "a": self.a, "b": self.b}


def disc(radius=1.0) -> EllipseBody:
    return EllipseBody(radius, radius)


class LpBall(GaugeBody):
    """Unit ball of ``(|x|^p + |y|^p)^(1/p)``.

    For ``p > 2`` the curvature vanishes at the four axis points, so the
    boundary is convex but not positively curved there.
    """

    def __init__(self, p):
        if not p > 1:
            raise SpecError("L^p ball needs p > 1")
        self.p = float(p)

    def gauge(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        m = np.max(x, axis=-1)
        safe = np.where(m > 0, m, 1.0)
        r = (x / safe[..., None]) ** self.p
        return np.where(m > 0, m * np.sum(r, axis=-1) ** (1.0 / self.p), 0.0)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        g = self.gauge(x)
        return np.sign(x) * (np.abs(x) / g[..., None]) ** (self.p - 1)

    def support(self, psi):
        q = self.p / (self.p - 1)
        psi = np.asarray(psi, dtype=float)
        return (np.abs(np.cos(psi)) ** q + np.abs(np.sin(psi)) ** q) ** (1 / q)

    def boundary(self):
        p = self.p
        if p < 2:
            raise PreconditionError("boundary derivatives of the L^p ball need p >= 2")

        def parts(u):
            c, s = np.cos(u), np.sin(u)
            ac, as_ = np.abs(c), np.abs(s)
            w = ac**p + as_**p
            e = as_ ** (p - 2) - ac ** (p - 2)
            w1 = p * c * s * e
            w2 = p * ((c * c - s * s) * e + (p - 2) * (c * c * as_ ** (p - 2) + s * s * ac ** (p - 2)))
            phi = w ** (-1 / p)
            phi1 = -(1 / p) * w ** (-1 / p - 1) * w1
            phi2 = -(1 / p) * ((-1 / p - 1) * w ** (-1 / p - 2) * w1 * w1 + w ** (-1 / p - 1) * w2)
            return unit(u), unit_perp(u), phi[..., None], phi1[..., None], phi2[..., None]

        def pos(u):
            e, _, f, _, _ = parts(u)
            return e * f

        def d1(u):
            e, ep, f, f1, _ = parts(u)
            return ep * f + e * f1

        def d2(u):
            e, ep, f, f1, f2 = parts(u)
            return -e * f + 2 * ep * f1 + e * f2

        return ParamCurve(2 * np.pi, pos, d1, d2, tag="custom", body=self)

    def to_dict(self):
        return {"type": "lp_ball", "p": self.p}


class PolygonBody(GaugeBody):
    """Convex polygon from a counterclockwise vertex list.

    The gauge is ``max_i <u_i, x> / h_i`` over outer edge normals ``u_i`` and
    edge offsets ``h_i``.  Polygons feed perimeter arithmetic only.
    """

    smooth = False

    def __init__(self, vertices):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or V.shape[0] < 3:
            raise SpecError("polygon needs at least three planar vertices")
        E = np.roll(V, -1, axis=0) - V
        lengths = np.hypot(E[:, 0], E[:, 1])
        if np.any(lengths == 0):
            raise SpecError("polygon has repeated vertices")
        turns = det2(E, np.roll(E, -1, axis=0))
        if not np.all(turns > 0):
            raise ConvexityError("polygon is not strictly convex and counterclockwise")
        if abs(np.sum(np.arctan2(turns, dot2(E, np.roll(E, -1, axis=0)))) - 2 * np.pi) > 1e-9:
            raise ConvexityError("polygon boundary winds more than once")
        normals = np.stack([E[:, 1], -E[:, 0]], axis=-1) / lengths[:, None]
        offsets = dot2(normals, V)
        if not np.all(offsets > 0):
            raise ConvexityError("origin is not interior to the polygon")
        self.vertices = V
        self.edges = E
        self.lengths = lengths
        self.normals = normals
        self.offsets = offsets

    def gauge(self, x):
        pts, shape = _flat(x)
        g, _ = kernels.polygon_gauge(self.normals, self.offsets, pts[:, 0], pts[:, 1])
        return g.reshape(shape)

    def active_edge(self, x):
        pts, shape = _flat(x)
        _, e = kernels.polygon_gauge(self.normals, self.offsets, pts[:, 0], pts[:, 1])
        return e.reshape(shape)

    def gradient(self, x):
        """Gradient on the maximizing edge (a one-sided derivative at vertex rays)."""
        e = self.active_edge(x)
        return self.normals[e] / self.offsets[e][..., None]

    def at_vertex(self, x, tol=1e-12):
        """True where two edge functionals tie, i.e. the gauge has a corner."""
        pts, shape = _flat(x)
        vals = (pts @ self.normals.T) / self.offsets
        top = np.sort(vals, axis=1)[:, -2:]
        return (top[:, 1] - top[:, 0] <= tol * np.maximum(np.abs(top[:, 1]), 1.0)).reshape(shape)

    def support(self, psi):
        return np.max(unit(psi) @ self.vertices.T, axis=-1)

    def boundary(self):
        V, E, lengths = self.vertices, self.edges, self.lengths
        starts = np.concatenate([[0.0], np.cumsum(lengths)])
        total = starts[-1]
        dirs = E / lengths[:, None]

        def where(s):
            s = np.mod(s, total)
            i = np.clip(np.searchsorted(starts, s, side="right") - 1, 0, len(V) - 1)
            return s, i

        def pos(s):
            s, i = where(s)
            return V[i] + (s - starts[i])[..., None] * dirs[i]

        def d1(s):
            _, i = where(s)
            return dirs[i]

        def d2(s):
            return np.zeros(np.shape(s) + (2,))

        return ParamCurve(total, pos, d1, d2, tag="euclidean-arc", body=self, check=False)

    def edge_midpoints(self):
        return self.vertices + 0.5 * self.edges

    def to_dict(self):
        return {"type": "polygon", "vertices": self.vertices.tolist()}


def regular_polygon(n, circumradius=1.0, phase=0.0) -> PolygonBody:
    ang = phase + 2 * np.pi * np.arange(n) / n
    return PolygonBody(circumradius * unit(ang))


class RoundedPolygonBody(GaugeBody):
    """Minkowski sum of a convex polygon and a disc of radius ``radius``.

    The support function is ``h_P + radius``.  The boundary alternates
    straight edges (translated outward by ``radius``) and circular arcs around
    the vertices; it is C^1 with piecewise constant curvature.
    """

    def __init__(self, base: PolygonBody, radius):
        if not radius > 0:
            raise SpecError("rounding radius must be positive")
        self.base = base
        self.radius = float(radius)
        V, n = base.vertices, len(base.vertices)
        ang = np.arctan2(base.normals[:, 1], base.normals[:, 0])
        # arc at vertex i turns from the normal of edge i-1 to the normal of edge i
        a0 = np.roll(ang, 1)
        sweep = np.mod(ang - a0, 2 * np.pi)
        pieces = []  # (kind, index, start angle, length)
        for i in range(n):
            pieces.append(("edge", i, 0.0, base.lengths[i]))
            j = (i + 1) % n
            pieces.append(("arc", j, a0[j], self.radius * sweep[j]))
        self._pieces = pieces
        self._starts = np.concatenate([[0.0], np.cumsum([p[3] for p in pieces])])
        self._unit_edges = base.edges / base.lengths[:, None]
        self._V = V

    # the gauge is C^1 (continuous gradient); curvature jumps at the arc ends
    smooth = True

    def _far(self, pts):
        """Largest ``s`` with ``s x`` in the body, and the winning piece."""
        b, rho = self.base, self.radius
        V = b.vertices
        A = dot2(pts, pts)[:, None]
        B = pts @ V.T
        C = dot2(V, V)[None, :] - rho**2
        D = B * B - A * C
        s_disc = np.where(D >= 0, (B + np.sqrt(np.maximum(D, 0))) / np.where(A > 0, A, 1), -np.inf)
        # rectangles edge_i + [0, rho] u_i
        an = pts @ b.normals.T
        ae = pts @ self._unit_edges.T
        e_lo = dot2(self._unit_edges, V)[None, :]
        e_hi = e_lo + b.lengths[None, :]
        h_lo = b.offsets[None, :]
        h_hi = h_lo + rho

        def interval(a, lo, hi):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                l1 = np.where(a > 0, lo / a, np.where(a < 0, hi / a, np.where((lo <= 0) & (hi >= 0), -np.inf, np.inf)))
                u1 = np.where(a > 0, hi / a, np.where(a < 0, lo / a, np.where((lo <= 0) & (hi >= 0), np.inf, -np.inf)))
            return l1, u1

        l1, u1 = interval(an, h_lo, h_hi)
        l2, u2 = interval(ae, e_lo, e_hi)
        lo = np.maximum(np.maximum(l1, l2), 0.0)
        hi = np.minimum(u1, u2)
        s_rect = np.where(hi >= lo, hi, -np.inf)
        cand = np.concatenate([s_rect, s_disc], axis=1)
        k = np.argmax(cand, axis=1)
        return cand[np.arange(len(pts)), k], k

    def gauge(self, x):
        pts, shape = _flat(x)
        zero = np.all(pts == 0, axis=1)
        # homogeneity: work with unit directions so tiny inputs do not underflow
        r = np.where(zero, 1.0, np.hypot(pts[:, 0], pts[:, 1]))
        s, _ = self._far(np.where(zero[:, None], [1.0, 0.0], pts / r[:, None]))
        return np.where(zero, 0.0, r / s).reshape(shape)

    def gradient(self, x):
        pts, shape = _flat(x)
        pts = pts / np.hypot(pts[:, 0], pts[:, 1])[:, None]
        s, k = self._far(pts)
        y = pts * s[:, None]
        n_edges = len(self.base.vertices)
        nrm = np.empty_like(pts)
        rect = k < n_edges
        nrm[rect] = self.base.normals[k[rect]]
        vtx = ~rect
        nrm[vtx] = (y[vtx] - self._V[k[vtx] - n_edges]) / self.radius
        return (nrm / dot2(y, nrm)[:, None]).reshape(shape + (2,))

    def support(self, psi):
        return self.base.support(psi) + self.radius

    def boundary(self):
        starts, pieces, rho = self._starts, self._pieces, self.radius
        V, U, N = self._V, self._unit_edges, self.base.normals
        total = starts[-1]
        kinds = np.array([p[0] == "arc" for p in pieces])
        idx = np.array([p[1] for p in pieces])
        a0 = np.array([p[2] for p in pieces])

        def where(s):
            s = np.mod(np.asarray(s, dtype=float), total)
            j = np.clip(np.searchsorted(starts, s, side="right") - 1, 0, len(pieces) - 1)
            return s - starts[j], j

        def pos(s):
            u, j = where(s)
            i = idx[j]
            edge = V[i] + rho * N[i] + u[..., None] * U[i]
            arc = V[i] + rho * unit(a0[j] + u / rho)
            return np.where(kinds[j][..., None], arc, edge)

        def d1(s):
            u, j = where(s)
            i = idx[j]
            return np.where(kinds[j][..., None], unit_perp(a0[j] + u / rho), U[i])

        def d2(s):
            u, j = where(s)
            arc = -unit(a0[j] + u / rho) / rho
            return np.where(kinds[j][..., None], arc, 0.0)

        return ParamCurve(total, pos, d1, d2, tag="euclidean-arc", body=self, check=False)

    def to_dict(self):
        return {"type": "rounded_polygon", "base": self.base.to_dict(), "radius": self.radius}


class LinearImage(GaugeBody):
    """The body ``A K`` for an invertible matrix ``A``: ``g_{AK}(x) = g_K(A^{-1} x)``."""

    def __init__(self, base: GaugeBody, matrix):
        A = np.asarray(matrix, dtype=float)
        if A.shape != (2, 2) or not np.linalg.det(A) > 0:
            raise SpecError("linear image needs an orientation preserving 2x2 matrix")
        self.base = base
        self.matrix = A
        self.inverse = np.linalg.inv(A)

    @property
    def smooth(self):
        return self.base.smooth

    def gauge(self, x):
        return self.base.gauge(apply(self.inverse, x))

    def gradient(self, x):
        return apply(self.inverse.T, self.base.gradient(apply(self.inverse, x)))

    def boundary(self):
        return self.base.boundary().transformed(self.matrix)

    def to_dict(self):
        return {"type": "linear_image", "base": self.base.to_dict(), "matrix": self.matrix.tolist()}


def body_boundary_samples(body: GaugeBody, n=256):
    """``n`` boundary points equispaced in the boundary parameter."""
    return body.boundary().sample(n)[1]
