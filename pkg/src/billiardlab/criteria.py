"""Numerical checks of the symmetry-rigidity conditions for invariant curves.

Each check returns plain numbers or a small report object with a
``to_dict`` method for JSON output.  Report verdicts are computed from
fixed, documented thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .billiards import minkowski_criticality, minkowski_system, minkowski_table
from .curves import (GaugeBody, ParamCurve, PolygonBody, RoundedPolygonBody, SupportCurve,
                     affine_normalize, apply, det2, dot2, regular_polygon, rotation_matrix,
                     solve_periodic_ode, unit_perp)
from .errors import PreconditionError, SymmetryError
from .symmetry import (INVARIANCE_TOL, FiniteOrderLinearMap, a_factor, as_param_curve,
                       detect_invariance, infer_linear_symmetry, make_rotation, parameter_shift)
from .twistmaps import mather_constancy, orbit_from_params

HARMONIC_REL_TOL = 1e-8
CONSTANCY_TOL = 1e-8
POLE_TOL = 1e-9


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


# ---------------------------------------------------------------------------
# constant reflection angle


def gutkin_angle_profile(curve: SupportCurve, r, k, samples=1024):
    """Angle between the chord ``gamma(psi) -> gamma(psi + 2 pi r / k)`` and the tangent at ``psi``.

    Returns
    -------
    d : callable
        ``psi -> `` angle in ``(0, pi)``.
    deviation : float
        ``max |d(psi) - pi r / k|`` over ``samples`` equispaced normal angles.

    Raises
    ------
    PreconditionError
        The curve is not invariant under the rotation by ``2 pi / k``.
    """
    r, k = int(r), int(k)
    if k < 2 or not 0 < r < k:
        raise PreconditionError("need k >= 2 and 0 < r < k")
    res = detect_invariance(curve, make_rotation(k))
    if res >= INVARIANCE_TOL:
        raise PreconditionError(f"curve is not invariant under rotation by 2pi/{k} (residual {res:.3g})")
    span = 2 * np.pi * r / k

    def d(psi):
        psi = np.asarray(psi, dtype=float)
        chord = curve.point(psi + span) - curve.point(psi)
        T = unit_perp(psi)
        return np.arctan2(det2(T, chord), dot2(T, chord))

    psi = np.arange(samples) * (2 * np.pi / samples)
    return d, float(np.max(np.abs(d(psi) - np.pi * r / k)))


def gutkin_equation_residual(n, x) -> float:
    """``tan(n x) - n tan(x)``.

    Raises
    ------
    PreconditionError
        ``x`` or ``n x`` is within ``1e-9`` of a pole of the tangent.
    """
    n, x = int(n), float(x)
    for y in (x, n * x):
        if abs(np.remainder(y, np.pi) - np.pi / 2) < POLE_TOL:
            raise PreconditionError(f"tangent pole at {y:.17g}")
    return float(np.tan(n * x) - n * np.tan(x))


def rational_pi_root_scan(n, q_max) -> float:
    """Smallest ``|tan(n x) - n tan(x)|`` over ``x = p pi / q`` in ``(0, pi/2)``.

    Reduced fractions with ``2 <= q <= q_max``; points where either tangent
    has a pole are skipped.
    """
    n, q_max = int(n), int(q_max)
    if n < 2 or q_max < 2:
        raise PreconditionError("need n >= 2 and q_max >= 2")
    best = np.inf
    for q in range(2, q_max + 1):
        for p in range(1, q):
            if 2 * p >= q:
                break
            if gcd(p, q) != 1:
                continue
            try:
                v = abs(gutkin_equation_residual(n, p * np.pi / q))
            except PreconditionError:
                continue
            best = min(best, v)
    return float(best)


# ---------------------------------------------------------------------------
# Fourier conditions


@dataclass(frozen=True)
class FourierSeries:
    """Complex coefficients ``c_n``, ``|n| <= N``, of ``gamma`` viewed as ``x + i y``."""

    n: np.ndarray
    c: np.ndarray

    def __getitem__(self, n):
        N = (self.n.size - 1) // 2
        if abs(n) > N:
            raise KeyError(n)
        return complex(self.c[n + N])


def fourier_coefficients(curve: ParamCurve, N=64, samples=None) -> FourierSeries:
    """Fourier coefficients of a ``2 pi``-periodic parametrization by the FFT.

    Raises
    ------
    PreconditionError
        The period is not ``2 pi``.
    """
    if abs(curve.period - 2 * np.pi) > 1e-12:
        raise PreconditionError(f"period is {curve.period:.17g}, expected 2 pi; "
                                "normalize the parametrization first")
    N = int(N)
    M = samples or max(1024, 4 * N)
    _, p = curve.sample(M)
    z = np.fft.fft(p[:, 0] + 1j * p[:, 1]) / M
    n = np.arange(-N, N + 1)
    return FourierSeries(n, z[n % M])


@dataclass(frozen=True)
class SymmetricFrame:
    """A ``2 pi``-periodic curve with a map ``B`` shifting it by ``2 pi r / k``."""

    curve: ParamCurve
    symmetry: FiniteOrderLinearMap
    B: FiniteOrderLinearMap
    r: int
    k: int
    shift_residual: float


def symmetric_frame(curve, r, k, symmetry: FiniteOrderLinearMap = None, normalize=True) -> SymmetricFrame:
    """Affine-normalize and pick the power ``B = A^m`` with ``B gamma(t) = gamma(t + 2 pi r / k)``.

    A symmetry ``A`` of order ``k`` preserves ``[gamma, gamma']`` and so shifts
    the normalized parameter by ``2 pi j / k``; ``m`` solves ``j m = r (mod k)``
    and is unique modulo ``k``.
    """
    r, k = int(r), int(k)
    if k < 2 or not 0 < r < k or gcd(r, k) != 1:
        raise PreconditionError(f"need 0 < r < k with gcd(r, k) = 1, got ({r}, {k})")
    pc = as_param_curve(curve)
    c = affine_normalize(pc) if normalize and pc.tag != "affine-normalized" else pc
    A = symmetry if symmetry is not None else infer_linear_symmetry(c, k)
    if A.order != k:
        raise PreconditionError(f"symmetry has order {A.order}, expected {k}")
    res = detect_invariance(c, A)
    if res >= INVARIANCE_TOL:
        raise PreconditionError(f"curve is not invariant under the symmetry (residual {res:.3g})")
    L = c.period
    s = parameter_shift(c, A, 0.0)
    j = int(round(s * k / L)) % k
    if abs(s - j * L / k) > 1e-6 * L and abs(s - L) > 1e-6 * L:
        raise PreconditionError("symmetry does not act as a parameter shift")
    m = (r * pow(j, -1, k)) % k
    B = A.power(m)
    t = np.linspace(0, L, 64, endpoint=False)
    shift = np.max(np.abs(B(c.position(t)) - c.position(t + r * L / k)))
    return SymmetricFrame(c, A, B, r, k, float(shift))


def _reparametrized(c: ParamCurve, f) -> ParamCurve:
    """``gamma(f(s))`` with ``f`` an ODE solution lifted to period ``2 pi``."""
    h = 1e-6

    def pos(s):
        return c.position(f(s))

    def d1(s):
        s = np.asarray(s, dtype=float)
        return f.derivative(s)[..., None] * c.d1(f(s))

    def d2(s):
        return (d1(np.asarray(s) + h) - d1(np.asarray(s) - h)) / (2 * h)

    return ParamCurve(c.period, pos, d1, d2, tag="custom", check=False)


@dataclass
class FourierReport:
    """Outcome of a Fourier check of an invariant-curve parametrization."""

    system: str
    r: int
    k: int
    lam_theory: float
    lam_ode: float
    lam_fit: float
    identity_residual: float
    c0: float
    c1: complex
    c_minus1: complex
    harmonics: list = field(default_factory=list)
    radius_spread: float = float("nan")
    rotation_index: int = 1
    conjugator: np.ndarray = None
    verdict: str = ""

    @property
    def consistent(self) -> bool:
        return not self.harmonics

    def to_dict(self):
        out = {k: _jsonable(v) for k, v in self.__dict__.items()}
        out["consistent"] = self.consistent
        return out


def _fourier_report(system, frame, G, lam_theory, condition, identity, N):
    c = frame.curve
    P = 2 * np.pi / frame.k
    t = np.linspace(0, 2 * np.pi, 1024, endpoint=False)
    g = np.asarray(G(t))
    if not np.all(g > 0):
        raise PreconditionError(f"G is not positive (minimum {g.min():.3g}): orientation failure")
    a, f = solve_periodic_ode(G, P)
    mu = _reparametrized(c, f)
    lam_fit, id_res = identity(mu, frame)
    fs = fourier_coefficients(mu, N)
    c1, cm1 = fs[1], fs[-1]
    thresh = HARMONIC_REL_TOL * (abs(c1) + abs(cm1))
    harmonics = []
    for n, cn in zip(fs.n, fs.c):
        if abs(n) < 2 or abs(cn) <= thresh:
            continue
        harmonics.append({"n": int(n), "abs": float(abs(cn)),
                          "residual": float(abs(condition(int(n), a)))})
    Pinv = np.linalg.inv(frame.B.conjugator)
    rad = np.hypot(*apply(Pinv, mu.sample(512)[1]).T)
    rep = FourierReport(system, frame.r, frame.k, float(lam_theory), float(a), float(lam_fit),
                        float(id_res), float(abs(fs[0])), c1, cm1, harmonics,
                        float(rad.max() - rad.min()), frame.B.rotation_index, frame.B.conjugator)
    rep.verdict = "ellipse-consistent" if rep.consistent else "not ellipse-consistent"
    return rep


def outer_fourier_check(curve, r, k, N=64, symmetry=None) -> FourierReport:
    """Fourier test for an outer billiard invariant curve of ``(k, r)`` orbits.

    The parametrization ``mu = gamma o f`` with ``lam f' = G(f)``,
    ``G = [(B - I) gamma, gamma'] / [B gamma', gamma']`` makes the identity
    ``(B - I) mu = lam (B + I) mu'`` hold on an invariant curve; every
    surviving harmonic ``n`` must then satisfy ``tan(pi r n / k) = lam n``.
    """
    fr = symmetric_frame(curve, r, k, symmetry)
    c, Bm = fr.curve, fr.B.matrix
    I = np.eye(2)

    def G(t):
        p, v = c.position(t), c.d1(t)
        return det2(apply(Bm - I, p), v) / det2(apply(Bm, v), v)

    def identity(mu, fr):
        s = np.linspace(0, 2 * np.pi, 1024, endpoint=False)
        u = apply(Bm - I, mu.position(s))
        w = apply(Bm + I, mu.d1(s))
        lam = float(np.sum(dot2(u, w)) / np.sum(dot2(w, w)))
        return lam, float(np.max(np.hypot(*(u - lam * w).T)))

    def condition(n, lam):
        return np.tan(np.pi * fr.r * n / fr.k) - n * lam

    return _fourier_report("outer", fr, G, np.tan(np.pi * r / k), condition, identity, N)


def symplectic_fourier_check(curve, r, k, N=64, symmetry=None) -> FourierReport:
    """Fourier test for a symplectic billiard invariant curve of ``(k, r)`` orbits.

    Uses ``G = -2 [B gamma, gamma]`` on the affine-normalized curve; the
    identity is ``mu(s + 2 theta) - mu(s) = lam mu'(s + theta)`` with
    ``theta = 2 pi r / k`` and harmonics must satisfy
    ``lam n = 2 sin(2 pi r n / k)``.
    """
    fr = symmetric_frame(curve, r, k, symmetry)
    c, Bm = fr.curve, fr.B.matrix
    theta = 2 * np.pi * r / k

    def G(t):
        p = c.position(t)
        return -2 * det2(apply(Bm, p), p)

    def identity(mu, fr):
        s = np.linspace(0, 2 * np.pi, 1024, endpoint=False)
        u = mu.position(s + 2 * theta) - mu.position(s)
        w = mu.d1(s + theta)
        lam = float(np.sum(dot2(u, w)) / np.sum(dot2(w, w)))
        return lam, float(np.max(np.hypot(*(u - lam * w).T)))

    def condition(n, lam):
        return 2 * np.sin(2 * np.pi * fr.r * n / fr.k) - n * lam

    return _fourier_report("symplectic", fr, G, 2 * np.sin(theta), condition, identity, N)


def sine_slack(n, x):
    """``|n| |sin x| - |sin n x|``."""
    return abs(n) * np.abs(np.sin(x)) - np.abs(np.sin(n * np.asarray(x, dtype=float)))


def sine_inequality_check(n, samples=10_000) -> float:
    """Smallest slack of ``|sin n x| <= |n| |sin x|`` over samples with ``|sin x| > 1e-3``."""
    n = int(n)
    if abs(n) < 2:
        raise PreconditionError("need |n| >= 2")
    x = np.linspace(0, 2 * np.pi, int(samples), endpoint=False)
    x = x[np.abs(np.sin(x)) > 1e-3]
    return float(np.min(sine_slack(n, x)))


# ---------------------------------------------------------------------------
# Minkowski constancy and extra symmetry


def b_minus_identity(k, m):
    """``R(2 pi m / k) - I`` together with the two closed forms it is compared with.

    Returns
    -------
    residual_half : float
        Distance to ``2 sin(pi m / k) R(pi/2 + pi m / k)``.
    residual_full : float
        Distance to ``2 sin(2 pi m / k) R(pi/2 + pi m / k)``.
    """
    D = rotation_matrix(2 * np.pi * m / k) - np.eye(2)
    R = rotation_matrix(np.pi / 2 + np.pi * m / k)
    return (float(np.max(np.abs(D - 2 * np.sin(np.pi * m / k) * R))),
            float(np.max(np.abs(D - 2 * np.sin(2 * np.pi * m / k) * R))))


def _body_symmetry(body: GaugeBody, k, m):
    if gcd(int(m), int(k)) != 1:
        raise PreconditionError(f"gcd({m}, {k}) != 1")
    curve = body.boundary()
    try:
        A = infer_linear_symmetry(curve, k)
    except SymmetryError as exc:
        raise PreconditionError(str(exc)) from exc
    return curve, A, A.power(m)


def constancy_profile(body: GaugeBody, B, samples=1024):
    """Boundary parameters and ``g_K(B gamma(t) - gamma(t))``."""
    curve = body.boundary()
    t, p = curve.sample(samples)
    return t, body.gauge(B(p) - p)


def minkowski_constancy(body: GaugeBody, k, m=1, samples=1024):
    """Spread and mean of ``g_K(B gamma - gamma)`` for ``B`` conjugate to rotation by ``2 pi m / k``.

    Returns
    -------
    max_dev : float
    lam_est : float
    """
    _, _, B = _body_symmetry(body, k, m)
    _, g = constancy_profile(body, B, samples)
    return float(g.max() - g.min()), float(g.mean())


@dataclass
class ExtraSymmetryReport:
    k: int
    m: int
    a: int
    quarter_residual: float
    order_residual: float
    max_dev: float
    lam_est: float
    lam_theory: float
    symmetric: bool
    constant: bool

    @property
    def agree(self) -> bool:
        return self.symmetric == self.constant

    @property
    def verdict(self) -> str:
        return "passes" if self.symmetric and self.constant else "fails"

    def to_dict(self):
        out = {k: _jsonable(v) for k, v in self.__dict__.items()}
        out.update(agree=self.agree, verdict=self.verdict)
        return out


def extra_symmetry_equivalence(body: GaugeBody, k, m=1, tol=CONSTANCY_TOL) -> ExtraSymmetryReport:
    """Compare gauge-perimeter constancy with invariance under the extra rotations.

    In the frame where ``B`` is a rotation, the body is tested for invariance
    under rotation by ``pi/2 + pi m / k`` and by ``2 pi / (a k)``.
    """
    k, m = int(k), int(m)
    curve, A, B = _body_symmetry(body, k, m)
    P = B.conjugator
    Pinv = np.linalg.inv(P)

    def conj(theta):
        return P @ rotation_matrix(theta) @ Pinv

    a = a_factor(k)
    quarter = detect_invariance(curve, conj(np.pi / 2 + np.pi * m / k))
    order = detect_invariance(curve, conj(2 * np.pi / (a * k)))
    dev, lam = minkowski_constancy(body, k, m)
    return ExtraSymmetryReport(k, m, a, float(quarter), float(order), dev, lam,
                               float(2 * np.sin(np.pi * B.rotation_index / k)),
                               bool(quarter < tol and order < tol), bool(dev < tol))


# ---------------------------------------------------------------------------
# invariant families


@dataclass
class InvariantFamily:
    """Symmetric ``(k, r)`` polylines ``gamma(t0 + i r L / k)`` on a gauge-arc table."""

    system: object
    B: FiniteOrderLinearMap
    orbits: list
    criticality: float
    action_spread: float

    def to_dict(self):
        return {"k": self.orbits[0].k, "r": self.orbits[0].winding, "members": len(self.orbits),
                "criticality": self.criticality, "action_spread": self.action_spread,
                "actions": [o.action for o in self.orbits]}


def construct_invariant_family(body: GaugeBody, k, r, samples=32, tol=CONSTANCY_TOL) -> InvariantFamily:
    """Family of symmetric ``(k, r)`` Minkowski orbits when the constancy criterion holds.

    Raises
    ------
    PreconditionError
        The body fails the constancy criterion, so no such family exists.
    """
    k, r = int(k), int(r)
    if gcd(k, r) != 1:
        raise PreconditionError(f"gcd({k}, {r}) != 1")
    rep = extra_symmetry_equivalence(body, k, 1, tol)
    if not (rep.symmetric and rep.constant):
        raise PreconditionError("criterion fails, no invariant family exists "
                                f"(max_dev {rep.max_dev:.3g}, residuals {rep.quarter_residual:.3g}, "
                                f"{rep.order_residual:.3g})")
    table = minkowski_table(body)
    sys = minkowski_system(table, body)
    frame = symmetric_frame(table, r, k, infer_linear_symmetry(table, k), normalize=False)
    L = table.period
    base = np.arange(samples) * (L / samples)
    orbits = [orbit_from_params(sys, t0 + np.arange(k) * (r * L / k), r) for t0 in base]
    crit = max(float(np.max(minkowski_criticality(table, body, frame.B, o.params))) for o in orbits)
    spread = mather_constancy(sys, orbits, tol=max(tol, 1e-10))
    return InvariantFamily(sys, frame.B, orbits, crit, spread)


def symmetric_orbit_actions(body: GaugeBody, k, r=1):
    """Actions of the two symmetric ``(k, r)`` candidates starting at ``t = 0`` and ``t = L / 2k``.

    On a body with a reflection axis through ``gamma(0)`` these are the
    vertex-type and midpoint-type orbits.  Returns the two orbits.
    """
    table = minkowski_table(body)
    sys = minkowski_system(table, body)
    L = table.period
    return [orbit_from_params(sys, t0 + np.arange(k) * (r * L / k), r) for t0 in (0.0, L / (2 * k))]


def polyline_gauge_perimeter(body: GaugeBody, points) -> float:
    """``sum_i g_K(x_{i+1} - x_i)`` over a closed polyline."""
    P = np.asarray(points, dtype=float)
    return float(np.sum(body.gauge(np.roll(P, -1, axis=0) - P)))


def polygon_orbit_perimeters(rounded=None):
    """Gauge perimeters of the symmetric orbits in the square and the regular hexagon.

    Each table is its own gauge body.  Square ``[-1, 1]^2``: corner and
    edge-midpoint 4-orbits.  Hexagon of circumradius 1: vertex and midpoint
    6-orbits, and every other vertex or midpoint for the 3-orbits.  With
    ``rounded`` the polygons are replaced by their ``rounded``-neighbourhoods
    and the orbit points by the corresponding boundary points (outward along
    the vertex bisector or edge normal).

    Returns
    -------
    list of (name, value)
    """
    square = PolygonBody([[1, 1], [-1, 1], [-1, -1], [1, -1]])
    hexagon = regular_polygon(6)
    rows = []
    for label, poly in (("square", square), ("hexagon", hexagon)):
        V = poly.vertices
        Mid = poly.edge_midpoints()
        if rounded:
            body = RoundedPolygonBody(poly, rounded)
            bis = V / np.hypot(*V.T)[:, None]
            V = V + rounded * bis
            Mid = Mid + rounded * poly.normals
        else:
            body = poly
        if label == "square":
            rows.append(("square corner 4-orbit", polyline_gauge_perimeter(body, V)))
            rows.append(("square midpoint 4-orbit", polyline_gauge_perimeter(body, Mid)))
        else:
            rows.append(("hexagon vertex 6-orbit", polyline_gauge_perimeter(body, V)))
            rows.append(("hexagon midpoint 6-orbit", polyline_gauge_perimeter(body, Mid)))
            rows.append(("hexagon vertex 3-orbit", polyline_gauge_perimeter(body, V[::2])))
            rows.append(("hexagon midpoint 3-orbit", polyline_gauge_perimeter(body, Mid[::2])))
    return rows


PERIMETERS_EXPECTED = (8.0, 4.0, 6.0, 6.0, 6.0, 4.5)

# older names, kept for API compatibility
figure5_perimeters = polygon_orbit_perimeters
FIGURE5_EXPECTED = PERIMETERS_EXPECTED
