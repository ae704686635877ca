"""Exact twist maps given by a generating function.

A generating function ``S(q, Q)`` defines the map ``(q, p) -> (Q, P)`` through
``p = -S1(q, Q)`` and ``P = S2(q, Q)``, where ``S1``, ``S2`` are the partial
derivatives.  Base parameters are lifted to the real line, so ``Q - q`` is the
forward displacement and must lie in the admissible band ``(0, upper(q))``.

Periodic orbits of type ``(k, r)`` are critical points of the cyclic sum
``sum_i S(t_i, t_{i+1})`` with ``t_{i+k} = t_i + r L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import gcd
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import BandError, PreconditionError, SolverError

STEP_TOL = 1e-11


@dataclass(frozen=True, eq=False)
class TwistSystem:
    """Generating function with its partials and band data.

    Parameters
    ----------
    name : str
    S, S1, S2 : callable
        Vectorized functions of ``(q, Q)``.
    period : float
        Horizontal period ``L``: ``S(q + L, Q + L) = S(q, Q)``.
    upper : callable
        ``q -> `` width of the admissible band of forward displacements.
    twist_sign : int
        Sign of the mixed partial ``S12``.
    S12 : callable, optional
        Mixed partial; central differences of ``S1`` are used if missing.
    upper_back : callable, optional
        ``Q -> `` width of the band of backward displacements ``Q - q``.
    curve : object, optional
        The table curve, for geometric post-processing.
    jet : callable, optional
        Scalar ``(q, Q) -> (S1, S12, S2)`` as floats, used by the map step.
    """

    name: str
    S: Callable
    S1: Callable
    S2: Callable
    period: float
    upper: Callable
    twist_sign: int = 1
    S12: Optional[Callable] = None
    upper_back: Optional[Callable] = None
    curve: object = None
    extra: dict = field(default_factory=dict)
    jet: Optional[Callable] = None

    def fd_step(self):
        return 1e-6 * self.period

    def mixed(self, q, Q):
        if self.S12 is not None:
            return self.S12(q, Q)
        h = self.fd_step()
        return (self.S1(q, Q + h) - self.S1(q, Q - h)) / (2 * h)

    def S11(self, q, Q):
        h = self.fd_step()
        return (self.S1(q + h, Q) - self.S1(q - h, Q)) / (2 * h)

    def S22(self, q, Q):
        h = self.fd_step()
        return (self.S2(q, Q + h) - self.S2(q, Q - h)) / (2 * h)

    def local(self, q, Q):
        """``(S1, S12, S2)`` at a scalar pair."""
        if self.jet is not None:
            return self.jet(q, Q)
        return float(self.S1(q, Q)), float(self.mixed(q, Q)), float(self.S2(q, Q))

    def band_back(self, Q):
        return self.upper_back(Q) if self.upper_back is not None else self.upper(Q)

    def in_band(self, q, Q) -> bool:
        d = np.asarray(Q, dtype=float) - np.asarray(q, dtype=float)
        return bool(np.all((d > 0) & (d < self.upper(q))))

    def check_twist(self, samples=64, seed=0) -> bool:
        """Sign of ``S12`` on random admissible pairs equals ``twist_sign``."""
        rng = np.random.default_rng(seed)
        q = rng.uniform(0, self.period, samples)
        frac = rng.uniform(0.05, 0.95, samples)
        Q = q + frac * self.upper(q)
        return bool(np.all(self.twist_sign * self.mixed(q, Q) > 0))


@dataclass(frozen=True)
class PhasePoint:
    """Point of the phase cylinder: lifted base parameter ``q`` and momentum ``p``."""

    q: float
    p: float


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    """Critical configuration of type ``(k, r)``.

    Attributes
    ----------
    params : ndarray
        ``t_0 < ... < t_{k-1}``; the lift continues as ``t_{i+k} = t_i + r L``.
    winding : int
    action : float
        Cyclic sum of the generating function.
    gradient_residual : float
        ``max_i |S2(t_{i-1}, t_i) + S1(t_i, t_{i+1})|``.
    period : float
    iterations : int
    """

    params: np.ndarray
    winding: int
    action: float
    gradient_residual: float
    period: float
    iterations: int = 0

    @property
    def k(self) -> int:
        return int(self.params.size)

    def lifted(self, extra=1):
        """The configuration extended by ``extra`` further points."""
        k = self.k
        idx = np.arange(k + extra)
        return self.params[idx % k] + (idx // k) * self.winding * self.period

    def phase_points(self, sys: TwistSystem):
        t = self.lifted(1)
        return [PhasePoint(float(t[i]), float(-sys.S1(t[i], t[i + 1]))) for i in range(self.k)]

    def to_dict(self, sys: Optional[TwistSystem] = None):
        out = {"params": self.params.tolist(), "winding": self.winding, "k": self.k,
               "action": self.action, "residual": self.gradient_residual,
               "period": self.period}
        if sys is not None:
            t = self.lifted(1)
            out["chord_values"] = np.asarray(sys.S(t[:-1], t[1:]), dtype=float).tolist()
        return out


def _solve_monotone(fdf, lo, hi, guess, tol, sign, max_iter=200):
    """Root of a monotone function in ``(lo, hi)`` by bisection-safeguarded Newton.

    ``fdf(x)`` returns ``(f, f', extra)`` and ``sign * f`` is increasing.
    Returns the last iterate with its ``(f, f', extra)``.
    """
    x = guess if lo < guess < hi else 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx, dx, extra = fdf(x)
        if not math.isfinite(fx):
            x = 0.5 * (lo + hi)
            continue
        if abs(fx) < tol:
            # one more Newton step is nearly free and reaches full precision
            new = x - fx / dx if dx != 0 and math.isfinite(dx) else math.nan
            if lo < new < hi:
                f2, d2, e2 = fdf(new)
                if abs(f2) <= abs(fx):
                    x, fx, dx, extra = new, f2, d2, e2
            break
        if sign * fx < 0:
            lo = x
        else:
            hi = x
        if hi - lo < 1e-15 * max(1.0, abs(x)):
            break
        new = x - fx / dx if dx != 0 and math.isfinite(dx) else math.nan
        x = new if lo < new < hi else 0.5 * (lo + hi)
    return x, fx, dx, extra


def twist_step(sys: TwistSystem, x: PhasePoint, guess: Optional[float] = None,
               tol: float = STEP_TOL) -> PhasePoint:
    """One application of the twist map.

    Solves ``S1(q, Q) = -p`` for ``Q`` in the admissible band and returns
    ``(Q, S2(q, Q))``.  ``guess`` is a displacement ``Q - q`` to start from.

    Raises
    ------
    BandError
        The momentum has no preimage in the band.
    SolverError
        The root could not be resolved to ``tol``, or ``S1`` is not monotone.
    """
    q, p = float(x.q), float(x.p)
    width = float(sys.upper(q))
    eps = 1e-12 * sys.period
    lo, hi = q + eps, q + width - eps
    sign = sys.twist_sign

    def fdf(Q):
        s1, s12, s2 = sys.local(q, Q)
        return s1 + p, s12, s2

    g = q + guess if guess is not None else q + 0.5 * width
    Q, fQ, dQ, P = _solve_monotone(fdf, lo, hi, g, tol, sign)
    if not abs(fQ) < tol:
        flo, fhi = fdf(lo)[0], fdf(hi)[0]
        if sign * flo > 0 or sign * fhi < 0:
            raise BandError(f"momentum {p:.17g} at q={q:.17g} is outside the admissible band "
                            f"[{-flo + p:.6g}, {-fhi + p:.6g}]")
        raise SolverError(f"twist step did not converge at q={q:.17g}", residual=abs(fQ))
    if not sign * dQ > 0:
        raise SolverError(f"twist condition violated at (q, Q) = ({q:.17g}, {Q:.17g})")
    return PhasePoint(Q, P)


def inverse_twist_step(sys: TwistSystem, X: PhasePoint, guess: Optional[float] = None,
                       tol: float = STEP_TOL) -> PhasePoint:
    """Inverse map: solve ``S2(q, Q) = P`` for ``q < Q`` and return ``(q, -S1(q, Q))``."""
    Q, P = float(X.q), float(X.p)
    width = float(sys.band_back(Q))
    eps = 1e-12 * sys.period
    lo, hi = Q - width + eps, Q - eps

    def fdf(q):
        s1, s12, s2 = sys.local(q, Q)
        return s2 - P, s12, -s1

    g = Q - guess if guess is not None else Q - 0.5 * width
    q, fq, _, p = _solve_monotone(fdf, lo, hi, g, tol, sys.twist_sign)
    if not abs(fq) < tol:
        raise BandError(f"momentum {P:.17g} at Q={Q:.17g} has no preimage in the band")
    return PhasePoint(q, p)


def iterate(sys: TwistSystem, x: PhasePoint, n: int):
    """Orbit ``[x, T x, ..., T^n x]``; errors report the failing step index."""
    out = [x]
    guess = None
    for i in range(int(n)):
        try:
            y = twist_step(sys, out[-1], guess)
        except (BandError, SolverError) as exc:
            raise type(exc)(f"step {i}: {exc}") from exc
        guess = y.q - out[-1].q
        out.append(y)
    return out


def rotation_number(sys: TwistSystem, x: PhasePoint, n: int = 10_000):
    """Rotation number estimate ``(q_n - q_0) / (n L)`` and the bound ``L / n``.

    For a monotone circle lift the displacement after ``n`` steps differs
    from ``n rho L`` by less than ``L``, so the estimate is within ``1/n`` of
    the rotation number; ``L / n`` is reported as the bound.
    """
    if n < 100:
        raise PreconditionError("rotation number needs at least 100 iterations")
    q0 = x.q
    cur, guess = x, None
    for i in range(int(n)):
        try:
            nxt = twist_step(sys, cur, guess)
        except (BandError, SolverError) as exc:
            raise type(exc)(f"step {i}: {exc}") from exc
        guess = nxt.q - cur.q
        cur = nxt
    return (cur.q - q0) / (n * sys.period), sys.period / n


# ---------------------------------------------------------------------------
# periodic orbits


def _cyclic(t, r, L):
    """Previous and next neighbours of each point in the lifted configuration."""
    k = t.size
    nxt = np.empty(k)
    prv = np.empty(k)
    nxt[:-1] = t[1:]
    nxt[-1] = t[0] + r * L
    prv[1:] = t[:-1]
    prv[0] = t[-1] - r * L
    return prv, nxt


def gradient(sys: TwistSystem, params, r):
    """``S2(t_{i-1}, t_i) + S1(t_i, t_{i+1})`` for the cyclic configuration."""
    t = np.asarray(params, dtype=float)
    prv, nxt = _cyclic(t, r, sys.period)
    return np.asarray(sys.S2(prv, t), dtype=float) + np.asarray(sys.S1(t, nxt), dtype=float)


def gradient_residual(sys: TwistSystem, params, r) -> float:
    return float(np.max(np.abs(gradient(sys, params, r))))


def total_action(sys: TwistSystem, params, r) -> float:
    t = np.asarray(params, dtype=float)
    _, nxt = _cyclic(t, r, sys.period)
    return float(np.sum(sys.S(t, nxt)))


def admissible(sys: TwistSystem, params, r) -> bool:
    t = np.asarray(params, dtype=float)
    if not np.all(np.isfinite(t)):
        return False
    _, nxt = _cyclic(t, r, sys.period)
    return sys.in_band(t, nxt)


def _jacobian(sys, t, r):
    k = t.size
    prv, nxt = _cyclic(t, r, sys.period)
    a = np.asarray(sys.mixed(prv, t), dtype=float)       # d g_i / d t_{i-1}
    c = np.asarray(sys.mixed(t, nxt), dtype=float)       # d g_i / d t_{i+1}
    diag = np.asarray(sys.S22(prv, t), dtype=float) + np.asarray(sys.S11(t, nxt), dtype=float)
    J = np.zeros((k, k))
    idx = np.arange(k)
    J[idx, idx] += diag
    J[idx, (idx - 1) % k] += a
    J[idx, (idx + 1) % k] += c
    return J


def periodic_orbit_solve(sys: TwistSystem, k: int, r: int, init: Optional[Iterable[float]] = None,
                         t0: float = 0.0, tol: float = 1e-10, max_iter: int = 100) -> PeriodicOrbit:
    """Find a ``(k, r)`` critical configuration by damped Newton iteration.

    The unknowns are the ``k`` base parameters; the Jacobian of the gradient
    is the cyclic tridiagonal matrix of second partials, solved in the least
    squares sense so that one-parameter families (degenerate directions) do
    not stall the iteration.  Steps are damped by backtracking on the squared
    gradient norm and must keep the configuration in the admissible cone.
    When no damped Newton step is acceptable a gradient step on the squared
    norm is tried instead.

    Raises
    ------
    PreconditionError
        ``gcd(k, r) != 1`` or the initial configuration is not admissible.
    SolverError
        No convergence within ``max_iter``; carries the residual trace.
    """
    k, r = int(k), int(r)
    if k < 2 or r < 1 or gcd(k, r) != 1:
        raise PreconditionError(f"need k >= 2, r >= 1 and gcd(k, r) = 1, got ({k}, {r})")
    L = sys.period
    if init is None:
        t = t0 + np.arange(k) * (r * L / k)
    else:
        t = np.array(list(init), dtype=float)
        if t.size != k:
            raise PreconditionError(f"init has {t.size} entries, expected {k}")
    if not admissible(sys, t, r):
        raise PreconditionError("initial configuration is not increasing within the band")

    g = gradient(sys, t, r)
    res = float(np.max(np.abs(g)))
    trace = [res]
    it = 0
    while res >= tol and it < max_iter:
        it += 1
        J = _jacobian(sys, t, r)
        step = np.linalg.lstsq(J, -g, rcond=1e-13)[0]
        merit = float(g @ g)
        accepted = False
        for direction in (step, -(J.T @ g)):
            alpha = 1.0
            if direction is not step:
                # scale the gradient step to the size of a Newton step
                nrm = np.max(np.abs(direction))
                if nrm == 0:
                    break
                alpha = min(1.0, 0.1 * L / k / nrm)
            while alpha > 1e-12:
                cand = t + alpha * direction
                if admissible(sys, cand, r):
                    gc = gradient(sys, cand, r)
                    if np.all(np.isfinite(gc)) and float(gc @ gc) < merit:
                        t, g = cand, gc
                        accepted = True
                        break
                alpha *= 0.5
            if accepted:
                break
        res = float(np.max(np.abs(g)))
        trace.append(res)
        if not accepted:
            break
    if res >= tol:
        raise SolverError(f"periodic orbit ({k}, {r}) not found: residual {res:.3g} "
                          f"after {it} iterations", residual=res, trace=trace)
    # normalise so that t_0 lies in [0, L)
    shift = np.floor(t[0] / L) * L
    t = t - shift
    return PeriodicOrbit(t, r, total_action(sys, t, r), res, L, it)


def orbit_from_params(sys: TwistSystem, params, r) -> PeriodicOrbit:
    """Wrap a configuration (not necessarily critical) with its diagnostics."""
    t = np.asarray(params, dtype=float)
    return PeriodicOrbit(t, int(r), total_action(sys, t, r), gradient_residual(sys, t, r),
                         sys.period)


def action(sys: TwistSystem, orbit: PeriodicOrbit) -> float:
    """Cyclic sum of the generating function along the orbit."""
    return total_action(sys, orbit.params, orbit.winding)


def mather_constancy(sys: TwistSystem, orbit_family, samples: int = 32, tol: float = 1e-10) -> float:
    """Spread ``max - min`` of the action over a family of periodic orbits.

    ``orbit_family`` is either a callable ``t -> PeriodicOrbit`` sampled at
    ``samples`` equispaced ``t`` in ``[0, L)``, or an iterable of orbits.
    """
    if callable(orbit_family):
        ts = np.arange(samples) * (sys.period / samples)
        orbits = [orbit_family(t) for t in ts]
    else:
        orbits = list(orbit_family)
    if not orbits:
        raise PreconditionError("empty orbit family")
    values = []
    for o in orbits:
        res = gradient_residual(sys, o.params, o.winding)
        if not res < tol:
            raise SolverError(f"family member not critical: residual {res:.3g}", residual=res)
        values.append(action(sys, o))
    return float(np.max(values) - np.min(values))


def verify_shift_property(f, L, k, samples=257, tol=1e-9) -> bool:
    """Check numerically that a monotone lift commuting with the 1/k shift is that shift.

    Returns ``True`` exactly when the hypotheses ``f(t + L/k) = f(t) + L/k``
    and ``f^k(t) = t + L`` hold on the samples and the conclusion
    ``f(t) = t + L/k`` holds as well, all within ``tol``.

    Raises
    ------
    PreconditionError
        ``f`` is not increasing on the samples.
    """
    t = np.linspace(0.0, L, samples)
    ft = np.asarray(f(t), dtype=float)
    if not np.all(np.diff(ft) > 0):
        raise PreconditionError("f is not increasing")
    shift = L / k
    h1 = np.max(np.abs(np.asarray(f(t + shift)) - ft - shift))
    it = t.copy()
    for _ in range(int(k)):
        it = np.asarray(f(it), dtype=float)
    h2 = np.max(np.abs(it - t - L))
    if h1 >= tol or h2 >= tol:
        return False
    return bool(np.max(np.abs(ft - t - shift)) < tol)
