"""Finite-order linear maps of the plane and symmetry detection for curves."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np
from scipy import optimize

from .curves import GaugeBody, ParamCurve, SupportCurve, apply, dot2, rotation_matrix
from .errors import PreconditionError, SpecError, SymmetryError

INVARIANCE_TOL = 1e-8
INVARIANCE_SAMPLES = 256


@dataclass(frozen=True, eq=False)
class FiniteOrderLinearMap:
    """A 2x2 matrix ``M`` of order ``k`` with ``M = P R(2 pi m / k) P^{-1}``.

    Attributes
    ----------
    matrix : ndarray
    order : int
    rotation_index : int
        ``m`` in ``0..k-1``, coprime to ``k``.
    conjugator : ndarray
        ``P`` with positive determinant.
    """

    matrix: np.ndarray
    order: int
    rotation_index: int
    conjugator: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        P = np.array(self.conjugator, dtype=float)
        k, m = int(self.order), int(self.rotation_index) % int(self.order)
        if k < 2:
            raise SymmetryError("order must be at least 2")
        if gcd(m, k) != 1:
            raise SymmetryError(f"rotation index {m} is not coprime to {k}")
        recon = P @ rotation_matrix(2 * np.pi * m / k) @ np.linalg.inv(P)
        if np.max(np.abs(recon - M)) > 1e-9 * max(1.0, np.max(np.abs(M))):
            raise SymmetryError("conjugator does not conjugate the matrix to its rotation")
        M.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "conjugator", P)
        object.__setattr__(self, "order", k)
        object.__setattr__(self, "rotation_index", m)

    @property
    def angle(self) -> float:
        """Rotation angle ``2 pi m / k`` of the conjugate rotation."""
        return 2 * np.pi * self.rotation_index / self.order

    def __call__(self, x):
        return apply(self.matrix, x)

    def power(self, j) -> "FiniteOrderLinearMap":
        """``M^j`` for ``j`` coprime to the order."""
        k = self.order
        j = int(j) % k
        if gcd(j, k) != 1:
            raise SymmetryError(f"power {j} does not keep order {k}")
        return FiniteOrderLinearMap(np.linalg.matrix_power(self.matrix, j), k,
                                    (self.rotation_index * j) % k, self.conjugator)

    def inverse(self) -> "FiniteOrderLinearMap":
        return self.power(-1)

    def to_dict(self):
        return {"type": "matrix", "entries": self.matrix.tolist(), "k": self.order,
                "m": self.rotation_index}


def make_rotation(k, m=1) -> FiniteOrderLinearMap:
    """Rotation by ``2 pi m / k``."""
    k, m = int(k), int(m)
    if k < 2:
        raise SymmetryError("order must be at least 2")
    if gcd(m % k, k) != 1:
        raise SymmetryError(f"gcd({m}, {k}) != 1")
    return FiniteOrderLinearMap(rotation_matrix(2 * np.pi * m / k), k, m % k, np.eye(2))


def conjugate_to_rotation(M, k) -> FiniteOrderLinearMap:
    """Write a matrix of order ``k`` as ``P R(2 pi m / k) P^{-1}`` with ``det P > 0``.

    For an eigenvector ``a + ib`` of ``e^{i theta}`` the conjugator is
    ``[a, -b]``; of the two conjugate eigenvalues the one giving a positive
    determinant is used, which fixes the sign of ``m``.
    """
    M = np.asarray(M, dtype=float)
    k = int(k)
    if M.shape != (2, 2):
        raise SymmetryError("expected a 2x2 matrix")
    if k < 2:
        raise SymmetryError("order must be at least 2")
    scale = max(1.0, float(np.max(np.abs(M))))
    I = np.eye(2)
    if np.max(np.abs(np.linalg.matrix_power(M, k) - I)) > 1e-10 * scale**k:
        raise SymmetryError(f"M^{k} is not the identity")
    for j in range(1, k):
        if np.max(np.abs(np.linalg.matrix_power(M, j) - I)) <= 1e-6:
            raise SymmetryError(f"M has order {j} < {k}")
    if abs(np.linalg.det(M) - 1.0) > 1e-9:
        raise SymmetryError("finite-order map must have determinant 1 (no reflections)")
    if k == 2:
        return FiniteOrderLinearMap(M, 2, 1, I)
    w, V = np.linalg.eig(M)
    i = int(np.argmax(w.imag))
    for idx in (i, 1 - i):
        v = V[:, idx]
        P = np.column_stack([v.real, -v.imag])
        d = np.linalg.det(P)
        if d > 0:
            P = P / np.sqrt(d)
            theta = float(np.angle(w[idx]))
            m = int(round(theta * k / (2 * np.pi))) % k
            return FiniteOrderLinearMap(M, k, m, P)
    raise SymmetryError("could not build an orientation preserving conjugator")


def a_factor(k) -> int:
    """1 if ``k = 2 mod 4``, 2 if ``k = 0 mod 4``, 4 if ``k`` is odd."""
    k = int(k)
    if k < 2:
        raise SpecError("k must be at least 2")
    if k % 2:
        return 4
    return 1 if k % 4 == 2 else 2


def as_param_curve(obj) -> ParamCurve:
    """Accept a ParamCurve, SupportCurve or GaugeBody and return a ParamCurve."""
    if isinstance(obj, ParamCurve):
        return obj
    if isinstance(obj, SupportCurve):
        return obj.as_param_curve()
    if isinstance(obj, GaugeBody):
        return obj.boundary()
    raise SpecError(f"cannot interpret {type(obj).__name__} as a curve")


def radial_gauge(curve: ParamCurve, x):
    """Gauge of the region bounded by ``curve``: ``|x| / |gamma(t)|`` on the ray of ``x``."""
    x = np.asarray(x, dtype=float)
    t = curve.locate(x)
    p = curve.position(t)
    return np.sqrt(dot2(x, x) / dot2(p, p))


def _matrix_of(M):
    if isinstance(M, FiniteOrderLinearMap):
        return M.matrix
    return np.asarray(M, dtype=float)


def detect_invariance(curve, M, samples=INVARIANCE_SAMPLES) -> float:
    """Deviation of ``M gamma`` from ``gamma``: ``max_t |g(M gamma(t)) - 1|``.

    ``g`` is the gauge of the region bounded by the curve.  The maximum over
    ``samples`` equispaced points is refined by a bounded scalar search near
    the largest samples, so the value describes the curve rather than the
    parametrization.
    """
    curve = as_param_curve(curve)
    A = _matrix_of(M)
    L = curve.period
    t = np.arange(samples) * (L / samples)

    def dev(tt):
        return np.abs(radial_gauge(curve, apply(A, curve.position(tt))) - 1.0)

    d = dev(t)
    best = float(np.max(d))
    if best < 1e-13:
        return best
    for j in np.argsort(d)[-3:]:
        res = optimize.minimize_scalar(
            lambda s: -float(dev(np.array([s]))[0]),
            bounds=(t[j] - L / samples, t[j] + L / samples), method="bounded",
            options={"xatol": 1e-12 * L})
        best = max(best, -float(res.fun))
    return best


def is_invariant(curve, M, tol=INVARIANCE_TOL) -> bool:
    return detect_invariance(curve, M) < tol


def inertia_matrix(curve) -> np.ndarray:
    """Second moments ``int_K x x^T dA`` of the enclosed region (Green's theorem)."""
    curve = as_param_curve(curve)
    n = 4096
    t = np.arange(n) * (curve.period / n)
    p, v = curve.position(t), curve.d1(t)
    x, y, dx, dy = p[:, 0], p[:, 1], v[:, 0], v[:, 1]
    w = curve.period / n
    ixx = np.sum(x**3 * dy) / 3 * w
    iyy = -np.sum(y**3 * dx) / 3 * w
    ixy = np.sum(x * x * y * dy) / 2 * w
    return np.array([[ixx, ixy], [ixy, iyy]])


def infer_linear_symmetry(curve, k, tol=INVARIANCE_TOL) -> FiniteOrderLinearMap:
    """Find a linear map of order ``k`` leaving the curve invariant.

    Any linear symmetry preserves the inertia matrix ``S``, so it is a rotation
    in the frame ``W = S^{-1/2}``.  The candidate ``W^{-1} R(2 pi / k) W`` is
    returned if it passes :func:`detect_invariance`.
    """
    curve = as_param_curve(curve)
    S = inertia_matrix(curve)
    ev, U = np.linalg.eigh(S)
    Winv = U @ np.diag(np.sqrt(ev)) @ U.T
    W = U @ np.diag(1 / np.sqrt(ev)) @ U.T
    A = Winv @ rotation_matrix(2 * np.pi / k) @ W
    sym = conjugate_to_rotation(A, k)
    res = detect_invariance(curve, sym)
    if res >= tol:
        raise PreconditionError(f"curve is not invariant under a linear map of order {k} "
                                f"(residual {res:.3g})")
    return sym


def rotation_orders(curve, kmax=16, tol=INVARIANCE_TOL):
    """Orders ``k <= kmax`` of rotations about the origin that leave the curve invariant."""
    curve = as_param_curve(curve)
    return [k for k in range(2, kmax + 1) if detect_invariance(curve, make_rotation(k)) < tol]


def linear_orders(curve, kmax=16, tol=INVARIANCE_TOL):
    """Orders ``k <= kmax`` of some linear map leaving the curve invariant."""
    out = []
    for k in range(2, kmax + 1):
        try:
            infer_linear_symmetry(curve, k, tol)
        except PreconditionError:
            continue
        out.append(k)
    return out


def symmetry_from_spec(spec) -> FiniteOrderLinearMap:
    """Build a map from ``{"type": "rotation", "k", "m"}`` or ``{"type": "matrix", "entries", "k"}``."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise SpecError("symmetry spec must be an object with a 'type'")
    kind = spec["type"]
    try:
        if kind == "rotation":
            return make_rotation(int(spec["k"]), int(spec.get("m", 1)))
        if kind == "matrix":
            return conjugate_to_rotation(np.array(spec["entries"], dtype=float), int(spec["k"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SymmetryError):
            raise
        raise SpecError(f"malformed symmetry spec: {exc}") from exc
    raise SpecError(f"unknown symmetry type {kind!r}")


def parameter_shift(curve: ParamCurve, M, t0=0.0) -> float:
    """Parameter of ``M gamma(t0)`` minus ``t0``, reduced to ``[0, period)``."""
    A = _matrix_of(M)
    t1 = float(curve.locate(apply(A, curve.position(np.array(t0)))))
    return float(np.mod(t1 - t0, curve.period))
