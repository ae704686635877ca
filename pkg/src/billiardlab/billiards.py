"""Birkhoff, outer, symplectic and Minkowski billiards as twist systems.

Each constructor returns a :class:`~billiardlab.twistmaps.TwistSystem` on a
parametrized table curve; direct geometric maps are provided alongside for
cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .curves import (GaugeBody, ParamCurve, PeriodicLift, apply, det2, dot2)
from .errors import BandError, PreconditionError, SolverError
from .twistmaps import PhasePoint, PeriodicOrbit, TwistSystem, orbit_from_params, twist_step

HORIZON = 1e6


def _pair(q, Q):
    q = np.asarray(q, dtype=float)
    Q = np.asarray(Q, dtype=float)
    return np.broadcast_arrays(q, Q)


@dataclass(frozen=True)
class BirkhoffPhase:
    """Outer normal angle ``psi`` of the bounce point and angle ``delta`` to the tangent."""

    psi: float
    delta: float

    def __post_init__(self):
        if not 0 < self.delta < np.pi:
            raise BandError("reflection angle must lie in (0, pi)")
        object.__setattr__(self, "psi", float(np.mod(self.psi, 2 * np.pi)))

    @property
    def momentum(self) -> float:
        return float(np.cos(self.delta))


@dataclass(frozen=True)
class OuterPhase:
    """Tangency parameter ``t`` and tangent coordinate ``lam > 0``: ``x = gamma(t) + lam gamma'(t)``."""

    t: float
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise BandError("outer phase coordinate lam must be positive")


# ---------------------------------------------------------------------------
# antipodal tangents


class TangentAngle:
    """Inverse of the (lifted, increasing) tangent direction angle of a curve."""

    def __init__(self, curve: ParamCurve, n=2048):
        self.curve = curve
        t = np.arange(n + 1) * (curve.period / n)
        v = curve.d1(t)
        ang = np.unwrap(np.arctan2(v[:, 1], v[:, 0]))
        if not np.all(np.diff(ang) > 0):
            raise PreconditionError("tangent angle is not increasing: curve not strictly convex")
        self.t, self.ang = t, ang

    def angle(self, s):
        s = np.asarray(s, dtype=float)
        L = self.curve.period
        turns = np.floor(s / L)
        base = s - turns * L
        v = self.curve.d1(base)
        raw = np.arctan2(v[..., 1], v[..., 0])
        ref = np.interp(base, self.t, self.ang)
        return raw + 2 * np.pi * np.round((ref - raw) / (2 * np.pi)) + 2 * np.pi * turns

    def solve(self, target):
        """Parameters whose lifted tangent angle equals ``target``."""
        target = np.asarray(target, dtype=float)
        L = self.curve.period
        turns = np.floor((target - self.ang[0]) / (2 * np.pi))
        red = target - 2 * np.pi * turns
        j = np.clip(np.searchsorted(self.ang, red, side="right") - 1, 0, self.t.size - 2)
        lo, hi = self.t[j].copy(), self.t[j + 1].copy()
        s = lo + (hi - lo) * (red - self.ang[j]) / (self.ang[j + 1] - self.ang[j])
        for _ in range(80):
            f = self.angle(s) - red
            v, a = self.curve.d1(s), self.curve.d2(s)
            d = det2(v, a) / dot2(v, v)
            lo = np.where(f < 0, s, lo)
            hi = np.where(f > 0, s, hi)
            with np.errstate(divide="ignore", invalid="ignore"):
                new = s - f / d
            bad = (new <= lo) | (new >= hi) | ~np.isfinite(new)
            new = np.where(f == 0, s, np.where(bad, 0.5 * (lo + hi), new))
            done = np.all(np.abs(new - s) <= 1e-15 * L)
            s = new
            if done:
                break
        return s + turns * L


def antipodal_parameter(curve: ParamCurve, t, tangents: TangentAngle = None):
    """First parameter after ``t`` where the tangent is antiparallel to ``gamma'(t)``."""
    ta = tangents or TangentAngle(curve)
    return ta.solve(ta.angle(t) + np.pi)


# ---------------------------------------------------------------------------
# Birkhoff


def birkhoff_system(curve: ParamCurve) -> TwistSystem:
    """Chord length ``|gamma(Q) - gamma(q)|`` on an arc-length parametrized table."""
    if curve.tag != "euclidean-arc":
        raise PreconditionError(f"Birkhoff system needs an arc-length parametrization, got {curve.tag!r}")
    L = curve.period

    def chord(q, Q):
        q, Q = _pair(q, Q)
        d = curve.position(Q) - curve.position(q)
        n = np.sqrt(dot2(d, d))
        return d, n

    def S(q, Q):
        return chord(q, Q)[1]

    def S1(q, Q):
        d, n = chord(q, Q)
        return -dot2(d, curve.d1(q)) / n

    def S2(q, Q):
        d, n = chord(q, Q)
        return dot2(d, curve.d1(Q)) / n

    def S12(q, Q):
        d, n = chord(q, Q)
        a, b = curve.d1(q), curve.d1(Q)
        return -(dot2(a, b) - dot2(d, a) * dot2(d, b) / (n * n)) / n

    def jet(q, Q):
        x0, y0, u0, v0, _, _ = curve.jet(q)
        x1, y1, u1, v1, _, _ = curve.jet(Q)
        dx, dy = x1 - x0, y1 - y0
        n = math.hypot(dx, dy)
        da, db = (dx * u0 + dy * v0) / n, (dx * u1 + dy * v1) / n
        return -da, -(u0 * u1 + v0 * v1 - da * db) / n, db

    return TwistSystem("birkhoff", S, S1, S2, L, lambda q: np.full(np.shape(q), L),
                       twist_sign=1, S12=S12, curve=curve, jet=jet)


def birkhoff_reflect(curve: ParamCurve, direction, bounce):
    """Reflect an incoming direction about the tangent line at the bounce point.

    Parameters
    ----------
    direction : array_like
        Direction of the incoming ray.
    bounce : float or array_like
        Parameter of the bounce point, or the point itself.

    Returns
    -------
    ndarray
        Unit outgoing direction.
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.hypot(d[0], d[1])
    b = np.asarray(bounce, dtype=float)
    t = float(curve.locate(b)) if b.shape == (2,) else float(b)
    T = curve.d1(np.array(t))
    T = T / np.hypot(T[0], T[1])
    if abs(det2(T, d)) < 1e-8:
        raise PreconditionError("tangential incidence")
    return 2 * dot2(d, T) * T - d


def reflection_angles(curve: ParamCurve, incoming, outgoing, t):
    """Angles in ``[0, pi]`` of the incoming and outgoing directions with the unit tangent at ``t``.

    The reflection law makes them equal.
    """
    T = curve.d1(np.array(float(t)))
    T = T / np.hypot(T[0], T[1])
    a_in = np.arctan2(abs(det2(T, incoming)), dot2(T, incoming))
    a_out = np.arctan2(abs(det2(T, outgoing)), dot2(T, outgoing))
    return float(a_in), float(a_out)


# ---------------------------------------------------------------------------
# outer billiards


class _AreaLift:
    """``A(t) = (1/2) int_0^t [gamma, gamma']``; its total is the table area."""

    def __init__(self, curve):
        self.lift = PeriodicLift(lambda t: 0.5 * det2(curve.position(t), curve.d1(t)), curve.period)
        self.table_area = self.lift.total

    def __call__(self, t):
        return self.lift(t)


def _tangent_intersection(curve, t, t1):
    t, t1 = _pair(t, t1)
    a, b = curve.d1(t), curve.d1(t1)
    D = curve.position(t1) - curve.position(t)
    ab = det2(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = det2(D, b) / ab
        lam1 = det2(a, D) / ab
    return lam, lam1


def outer_generating(curve: ParamCurve, t, t1, _area=None):
    """Area of the convex hull of the table and the intersection of the tangents at ``t``, ``t1``.

    Computed as table area plus the region between the two tangent segments
    and the boundary arc from ``t`` to ``t1``.

    Raises
    ------
    BandError
        The tangents are (nearly) parallel or meet behind the arc.
    """
    area = _area or _AreaLift(curve)
    lam, lam1 = _tangent_intersection(curve, t, t1)
    size = float(np.max(np.abs(curve.sample(16)[1])))
    ok = (lam > 0) & (lam1 > 0) & (lam < HORIZON * size) & (lam1 < HORIZON * size)
    if not np.all(ok):
        raise BandError("tangent lines do not meet at an admissible exterior point")
    t, t1 = _pair(t, t1)
    g0 = det2(curve.position(t), curve.d1(t))
    g1 = det2(curve.position(t1), curve.d1(t1))
    return area.table_area + 0.5 * lam * g0 + 0.5 * lam1 * g1 - (area(t1) - area(t))


def outer_system(curve: ParamCurve) -> TwistSystem:
    """Outer billiard with coordinates ``(t, p)``, ``p = (1/2) lam^2 [gamma'(t), gamma''(t)]``.

    The phase point ``x = gamma(t) + lam gamma'(t)`` is sent to
    ``x' = 2 gamma(t1) - x`` where ``x = gamma(t1) - lam1 gamma'(t1)``.
    The generating function is the hull area; ``S12 < 0``.
    """
    area = _AreaLift(curve)
    tangents = TangentAngle(curve)
    L = curve.period

    def S(q, Q):
        return outer_generating(curve, q, Q, area)

    def S1(q, Q):
        lam, _ = _tangent_intersection(curve, q, Q)
        q = np.broadcast_to(np.asarray(q, dtype=float), np.shape(lam))
        return -0.5 * lam**2 * det2(curve.d1(q), curve.d2(q))

    def S2(q, Q):
        _, lam1 = _tangent_intersection(curve, q, Q)
        Q = np.broadcast_to(np.asarray(Q, dtype=float), np.shape(lam1))
        return 0.5 * lam1**2 * det2(curve.d1(Q), curve.d2(Q))

    def upper(q):
        q = np.asarray(q, dtype=float)
        return tangents.solve(tangents.angle(q) + np.pi) - q

    def upper_back(Q):
        Q = np.asarray(Q, dtype=float)
        return Q - tangents.solve(tangents.angle(Q) - np.pi)

    return TwistSystem("outer", S, S1, S2, L, upper, twist_sign=-1, upper_back=upper_back,
                       curve=curve, extra={"area": area, "tangents": tangents})


def outer_momentum(curve: ParamCurve, t, lam):
    t = np.asarray(t, dtype=float)
    return 0.5 * np.asarray(lam) ** 2 * det2(curve.d1(t), curve.d2(t))


def outer_lambda(curve: ParamCurve, t, p):
    t = np.asarray(t, dtype=float)
    return np.sqrt(2 * np.asarray(p) / det2(curve.d1(t), curve.d2(t)))


def outer_point(curve: ParamCurve, phase: OuterPhase):
    t = np.array(phase.t)
    return curve.position(t) + phase.lam * curve.d1(t)


def _visible_arc(curve: ParamCurve, x, n=512):
    """Parameters where ``[gamma'(t), x - gamma(t)]`` changes sign (entry, exit)."""
    from .symmetry import radial_gauge

    x = np.asarray(x, dtype=float)
    if not radial_gauge(curve, x) > 1 + 1e-12:
        raise PreconditionError("point is not strictly outside the table")

    def phi(t):
        return det2(curve.d1(t), x - curve.position(t))

    t = np.arange(n + 1) * (curve.period / n)
    f = phi(t)
    out = {}
    for key, mask in (("entry", (f[:-1] > 0) & (f[1:] <= 0)), ("exit", (f[:-1] < 0) & (f[1:] >= 0))):
        j = np.flatnonzero(mask)
        if j.size:
            out[key] = optimize.brentq(phi, t[j[0]], t[j[0] + 1], xtol=1e-15)
    if len(out) != 2:
        raise SolverError("tangency points not found")
    return out["entry"], out["exit"]


def outer_phase_from_point(curve: ParamCurve, x) -> OuterPhase:
    """Phase ``(t, lam)`` with ``x = gamma(t) + lam gamma'(t)``, ``lam > 0``."""
    t, _ = _visible_arc(curve, x)
    v = curve.d1(np.array(t))
    lam = dot2(np.asarray(x) - curve.position(np.array(t)), v) / dot2(v, v)
    return OuterPhase(float(t), float(lam))


def outer_map(curve: ParamCurve, x):
    """Reflect ``x`` through the tangency point ``gamma(t1)`` with ``x = gamma(t1) - lam1 gamma'(t1)``.

    Returns
    -------
    x_new : ndarray
        ``2 gamma(t1) - x``.
    t1 : float
        Parameter of the tangency point.
    """
    x = np.asarray(x, dtype=float)
    _, t1 = _visible_arc(curve, x)
    p = curve.position(np.array(t1))
    return 2 * p - x, float(t1)


# ---------------------------------------------------------------------------
# symplectic billiards


def symplectic_system(curve: ParamCurve) -> TwistSystem:
    """Generating function ``[gamma(q), gamma(Q)]``; band up to the parallel tangent."""
    tangents = TangentAngle(curve)
    L = curve.period

    def S(q, Q):
        q, Q = _pair(q, Q)
        return det2(curve.position(q), curve.position(Q))

    def S1(q, Q):
        q, Q = _pair(q, Q)
        return det2(curve.d1(q), curve.position(Q))

    def S2(q, Q):
        q, Q = _pair(q, Q)
        return det2(curve.position(q), curve.d1(Q))

    def S12(q, Q):
        q, Q = _pair(q, Q)
        return det2(curve.d1(q), curve.d1(Q))

    def upper(q):
        q = np.asarray(q, dtype=float)
        return tangents.solve(tangents.angle(q) + np.pi) - q

    def upper_back(Q):
        Q = np.asarray(Q, dtype=float)
        return Q - tangents.solve(tangents.angle(Q) - np.pi)

    def jet(q, Q):
        x0, y0, u0, v0, _, _ = curve.jet(q)
        x1, y1, u1, v1, _, _ = curve.jet(Q)
        return u0 * y1 - v0 * x1, u0 * v1 - v0 * u1, x0 * v1 - y0 * u1

    return TwistSystem("symplectic", S, S1, S2, L, upper, twist_sign=1, S12=S12,
                       upper_back=upper_back, curve=curve, extra={"tangents": tangents}, jet=jet)


def symplectic_next(curve: ParamCurve, t, t1, system: TwistSystem = None, tol=1e-11) -> float:
    """Third point: the tangent at ``t1`` is parallel to ``gamma(t2) - gamma(t)``."""
    sys = system or symplectic_system(curve)
    t, t1 = float(t), float(t1)
    if not sys.in_band(t, t1):
        raise BandError("pair (t, t1) is outside the symplectic band")
    y = twist_step(sys, PhasePoint(t1, float(sys.S2(t, t1))), guess=t1 - t)
    t2 = y.q
    res = abs(float(det2(curve.d1(np.array(t1)), curve.position(np.array(t2)) - curve.position(np.array(t)))))
    if not res < tol:
        raise SolverError(f"symplectic step residual {res:.3g}", residual=res)
    return t2


# ---------------------------------------------------------------------------
# Minkowski billiards


def minkowski_system(curve: ParamCurve, body: GaugeBody) -> TwistSystem:
    """Generating function ``g_K(gamma(Q) - gamma(q))`` with gauge-differential momenta."""
    if not body.smooth:
        raise PreconditionError("Minkowski dynamics need a smooth gauge body")
    if curve.tag != "gauge-arc":
        raise PreconditionError(f"Minkowski system needs a gauge-arc parametrization, got {curve.tag!r}")
    L = curve.period

    def chord(q, Q):
        q, Q = _pair(q, Q)
        return q, Q, curve.position(Q) - curve.position(q)

    def S(q, Q):
        return body.gauge(chord(q, Q)[2])

    def S1(q, Q):
        q, _, d = chord(q, Q)
        return -body.gauge_differential(d, curve.d1(q))

    def S2(q, Q):
        _, Q, d = chord(q, Q)
        return body.gauge_differential(d, curve.d1(Q))

    return TwistSystem("minkowski", S, S1, S2, L, lambda q: np.full(np.shape(q), L),
                       twist_sign=1, curve=curve, extra={"body": body})


def as_gauge_arc(curve: ParamCurve, body: GaugeBody) -> ParamCurve:
    """Gauge-arc parametrization, reusing ``curve`` when it already has unit gauge speed."""
    from .curves import gauge_arc_reparametrize

    if curve.tag == "gauge-arc":
        return curve
    t = np.linspace(0, curve.period, 97)
    if np.max(np.abs(body.gauge(curve.d1(t)) - 1.0)) < 1e-14:
        return replace(curve, tag="gauge-arc", body=body)
    return gauge_arc_reparametrize(curve, body)


def minkowski_table(body: GaugeBody) -> ParamCurve:
    """Boundary of ``body`` parametrized with unit gauge speed in its own gauge."""
    return as_gauge_arc(body.boundary(), body)


def minkowski_criticality(curve: ParamCurve, body: GaugeBody, B, t):
    """``|f'(t)|`` for ``f(tau) = g(B gamma(t) - gamma(tau)) + g(gamma(tau) - B^{-1} gamma(t))``.

    The derivative is taken along the unit-gauge tangent, so the value does
    not depend on the parametrization.  Accepts an array of ``t``.
    """
    M = B.matrix if hasattr(B, "matrix") else np.asarray(B, dtype=float)
    Minv = np.linalg.inv(M)
    t = np.asarray(t, dtype=float)
    p, v = curve.position(t), curve.d1(t)
    v = v / body.gauge(v)[..., None]
    fwd = apply(M, p) - p
    back = p - apply(Minv, p)
    if np.any(np.all(np.abs(fwd) < 1e-14, axis=-1)) or np.any(np.all(np.abs(back) < 1e-14, axis=-1)):
        raise PreconditionError("B fixes the boundary point: zero chord")
    return np.abs(-body.gauge_differential(fwd, v) + body.gauge_differential(back, v))


# ---------------------------------------------------------------------------
# symmetry images


def _params_of_points(curve: ParamCurve, pts, r):
    """Increasing lifted parameters of the points with total winding ``r``."""
    L = curve.period
    tau = curve.locate(pts)
    out = np.empty_like(tau)
    out[0] = tau[0]
    for i in range(1, tau.size):
        d = np.mod(tau[i] - out[i - 1], L)
        out[i] = out[i - 1] + d
    return out


def map_orbit(sys: TwistSystem, orbit: PeriodicOrbit, M) -> PeriodicOrbit:
    """Image of a periodic configuration under a linear map of the table.

    The image points are located on the table and re-lifted; the result
    carries its own gradient residual, which is small exactly when the
    map commutes with the dynamics.
    """
    A = M.matrix if hasattr(M, "matrix") else np.asarray(M, dtype=float)
    curve = sys.curve
    pts = apply(A, curve.position(orbit.params))
    params = _params_of_points(curve, pts, orbit.winding)
    return orbit_from_params(sys, params, orbit.winding)


SYSTEMS = ("birkhoff", "outer", "symplectic", "minkowski")


def build_system(name: str, curve: ParamCurve, body: GaugeBody = None) -> TwistSystem:
    """Dispatch by name, reparametrizing the curve as each system requires."""
    from .curves import arc_length_reparametrize

    if name == "birkhoff":
        return birkhoff_system(arc_length_reparametrize(curve))
    if name == "outer":
        return outer_system(curve)
    if name == "symplectic":
        return symplectic_system(curve)
    if name == "minkowski":
        if body is None:
            raise PreconditionError("Minkowski system needs a gauge body")
        return minkowski_system(as_gauge_arc(curve, body), body)
    raise PreconditionError(f"unknown system {name!r}; choose from {', '.join(SYSTEMS)}")
