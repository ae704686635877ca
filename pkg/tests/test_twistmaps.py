import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from billiardlab.billiards import birkhoff_reflect, birkhoff_system, symplectic_system
from billiardlab.curves import arc_length_reparametrize, det2
from billiardlab.errors import BandError, PreconditionError
from billiardlab.twistmaps import (PhasePoint, action, gradient_residual, inverse_twist_step,
                                   iterate, mather_constancy, orbit_from_params,
                                   periodic_orbit_solve, rotation_number, twist_step,
                                   verify_shift_property)


@pytest.fixture(scope="module")
def disk():
    from billiardlab.curves import EllipseBody
    return birkhoff_system(EllipseBody(1, 1).boundary())


@pytest.fixture(scope="module")
def ell():
    from billiardlab.curves import EllipseBody
    return birkhoff_system(arc_length_reparametrize(EllipseBody(2, 1).boundary()))


def test_diameter_step(disk):
    y = twist_step(disk, PhasePoint(0.0, 0.0))
    assert y.q == pytest.approx(np.pi, abs=1e-12)
    assert y.p == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("theta", [np.pi / 3, 0.1, 1.2])
def test_circle_step_closed_form(disk, theta):
    # the chord leaving at angle theta to the tangent subtends 2 theta
    y = twist_step(disk, PhasePoint(0.4, np.cos(theta)))
    assert y.q == pytest.approx(0.4 + 2 * theta, abs=1e-12)
    assert y.p == pytest.approx(np.cos(theta), abs=1e-12)


def test_band_error(disk):
    with pytest.raises(BandError):
        twist_step(disk, PhasePoint(0.0, 1.5))


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(-0.95, 0.95))
def test_ellipse_step_matches_reflection(q, p):
    sys = _ELL
    c = sys.curve
    x1 = twist_step(sys, PhasePoint(q, p))
    x2 = twist_step(sys, x1)
    # momentum is the cosine of the angle between chord and unit tangent
    chord = c.position(np.array(x1.q)) - c.position(np.array(q))
    T = c.d1(np.array(q))
    assert np.dot(chord, T) / np.linalg.norm(chord) == pytest.approx(p, abs=1e-10)
    out = birkhoff_reflect(c, chord, x1.q)
    nxt = c.position(np.array(x2.q)) - c.position(np.array(x1.q))
    assert abs(det2(out, nxt / np.linalg.norm(nxt))) < 1e-9
    assert np.dot(out, nxt) > 0


_ELL = None


@pytest.fixture(autouse=True, scope="module")
def _ellipse_global(ell):
    global _ELL
    _ELL = ell


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(-0.95, 0.95))
def test_inverse_round_trip(q, p):
    x = PhasePoint(q, p)
    y = twist_step(_ELL, x)
    z = inverse_twist_step(_ELL, y)
    assert z.q == pytest.approx(q, abs=1e-10)
    assert z.p == pytest.approx(p, abs=1e-10)


def test_iterate_circle(disk):
    orbit = iterate(disk, PhasePoint(0.0, np.cos(np.pi / 3)), 3)
    assert len(orbit) == 4
    assert orbit[-1].q == pytest.approx(2 * np.pi, abs=1e-11)


def test_iterate_reports_step():
    sys = symplectic_system(arc_length_reparametrize(_ELL.curve))
    with pytest.raises(BandError, match="step 0"):
        iterate(sys, PhasePoint(0.0, 1e3), 2)


@pytest.mark.parametrize("alpha", [1 / 3, (np.sqrt(5) - 1) / 2, 0.2])
def test_rotation_number_circle(disk, alpha):
    rho, bound = rotation_number(disk, PhasePoint(0.0, np.cos(np.pi * alpha)), 10_000)
    assert abs(rho - alpha) < bound


def test_rotation_number_needs_iterations(disk):
    with pytest.raises(PreconditionError):
        rotation_number(disk, PhasePoint(0.0, 0.5), 10)


# ---------------------------------------------------------------------------
# periodic orbits


def test_triangle(disk):
    o = periodic_orbit_solve(disk, 3, 1, init=[0.0, 2.0, 4.3])
    assert o.action == pytest.approx(3 * np.sqrt(3), abs=1e-9)
    assert o.gradient_residual < 1e-10
    d = np.diff(o.lifted(1))
    np.testing.assert_allclose(d, 2 * np.pi / 3, atol=1e-9)


def test_heptagram(disk):
    o = periodic_orbit_solve(disk, 7, 2)
    assert o.action == pytest.approx(14 * np.sin(2 * np.pi / 7), abs=1e-9)


def test_ellipse_two_orbits(ell):
    L = ell.period
    major = periodic_orbit_solve(ell, 2, 1, init=[0.1, L / 2 - 0.1])
    # bounce points at (+-2, 0): the cyclic sum runs the major axis twice
    assert major.action == pytest.approx(8.0, abs=1e-9)
    minor = periodic_orbit_solve(ell, 2, 1, init=[L / 4 + 0.1, 3 * L / 4 - 0.05])
    assert minor.action == pytest.approx(4.0, abs=1e-9)


def test_bad_type(disk):
    with pytest.raises(PreconditionError):
        periodic_orbit_solve(disk, 4, 2)
    with pytest.raises(PreconditionError):
        periodic_orbit_solve(disk, 3, 1, init=[0.0, 1.0])
    with pytest.raises(PreconditionError):
        periodic_orbit_solve(disk, 3, 1, init=[0.0, 3.0, 2.0])


def test_orbit_from_params(disk):
    o = orbit_from_params(disk, [0.0, 1.0, 4.0], 1)
    assert o.gradient_residual > 0.1
    assert action(disk, o) == pytest.approx(o.action)
    assert gradient_residual(disk, o.params, 1) == o.gradient_residual


def test_mather_constancy_circle(disk):
    fam = lambda t: periodic_orbit_solve(disk, 5, 2, t0=t)
    assert mather_constancy(disk, fam, samples=8) < 1e-12


def test_mather_constancy_needs_critical(disk):
    with pytest.raises(Exception):
        mather_constancy(disk, [orbit_from_params(disk, [0.0, 1.0, 4.0], 1)])


# ---------------------------------------------------------------------------
# shift property


def test_shift_property_translation():
    L, k = 2 * np.pi, 5
    assert verify_shift_property(lambda t: t + L / k, L, k)


def test_shift_property_failed_hypothesis():
    L, k = 2 * np.pi, 4
    assert not verify_shift_property(lambda t: t + L / k + 0.05 * np.sin(k * t), L, k)
    assert not verify_shift_property(lambda t: t + 1.0, L, k)


def test_shift_property_requires_monotone():
    with pytest.raises(PreconditionError):
        verify_shift_property(lambda t: -t, 2 * np.pi, 3)
