import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from billiardlab import criteria as cr
from billiardlab.curves import (EllipseBody, LinearImage, LpBall, PolygonBody, SupportBody,
                                SupportCurve, disc)
from billiardlab.errors import PreconditionError
from oracles import direct_fourier, support_values

SQUARE = PolygonBody([[1, 1], [-1, 1], [-1, -1], [1, -1]])


# ---------------------------------------------------------------------------
# constant reflection angle


def _oracle_chord_angle(mean, a, b, psi, span):
    def point(p):
        h, h1, _, _ = support_values(mean, a, b, p)
        return np.stack([h * np.cos(p) - h1 * np.sin(p), h * np.sin(p) + h1 * np.cos(p)], -1)

    chord = point(psi + span) - point(psi)
    T = np.stack([-np.sin(psi), np.cos(psi)], -1)
    return np.arctan2(T[..., 0] * chord[..., 1] - T[..., 1] * chord[..., 0],
                      np.sum(T * chord, -1))


def test_circle_angle_is_constant():
    _, dev = cr.gutkin_angle_profile(SupportCurve(1.0), 2, 5)
    assert dev < 1e-14


def test_angle_profile_matches_oracle():
    a = [0.0, 0.0, 0.02]
    c = SupportCurve(1.0, a)
    d, dev = cr.gutkin_angle_profile(c, 1, 3)
    psi = np.linspace(0, 2 * np.pi, 97)
    ref = _oracle_chord_angle(1.0, a, [0.0] * 3, psi, 2 * np.pi / 3)
    np.testing.assert_allclose(d(psi), ref, atol=1e-13)
    assert dev == pytest.approx(np.max(np.abs(ref - np.pi / 3)), rel=0.05)
    assert dev > 1e-3


def test_angle_profile_requires_symmetry():
    # constant width but not centrally symmetric
    with pytest.raises(PreconditionError):
        cr.gutkin_angle_profile(SupportCurve(1.0, [0.0, 0.0, 0.1]), 1, 2)
    with pytest.raises(PreconditionError):
        cr.gutkin_angle_profile(SupportCurve(1.0), 3, 3)


def test_equation_residual():
    assert cr.gutkin_equation_residual(2, np.pi / 6) == pytest.approx(1 / np.sqrt(3), abs=1e-14)
    assert cr.gutkin_equation_residual(3, 0.0) == 0.0
    with pytest.raises(PreconditionError):
        cr.gutkin_equation_residual(2, np.pi / 4)


@pytest.mark.parametrize("n", range(2, 11))
def test_no_rational_roots(n):
    assert cr.rational_pi_root_scan(n, 40) > 9e-4


def test_root_scan_value():
    assert cr.rational_pi_root_scan(2, 10) == pytest.approx(0.0767, abs=1e-4)


@settings(max_examples=200, deadline=None)
@given(st.integers(-12, 12).filter(lambda n: abs(n) >= 2), st.floats(-10, 10))
def test_sine_inequality(n, x):
    assert cr.sine_slack(n, x) >= -1e-12


@pytest.mark.parametrize("n", [2, 3, 7, -4])
def test_sine_inequality_scan(n):
    assert cr.sine_inequality_check(n) > 0


# ---------------------------------------------------------------------------
# Fourier checks


def test_fourier_coefficients_ellipse(ellipse):
    fs = cr.fourier_coefficients(ellipse, 8)
    assert fs[1] == pytest.approx(1.5, abs=1e-14)
    assert fs[-1] == pytest.approx(0.5, abs=1e-14)
    assert abs(fs[0]) < 1e-15 and abs(fs[3]) < 1e-15
    with pytest.raises(KeyError):
        fs[9]


def test_fourier_coefficients_oracle(fourfold):
    c = fourfold.as_param_curve()
    fs = cr.fourier_coefficients(c, 12, samples=512)
    _, p = c.sample(512)
    z = p[:, 0] + 1j * p[:, 1]
    for n in (-5, -3, 1, 3, 5, 7):
        assert fs[n] == pytest.approx(direct_fourier(z, n), abs=1e-14)


def test_fourier_needs_two_pi():
    from billiardlab.curves import arc_length_reparametrize
    with pytest.raises(PreconditionError):
        cr.fourier_coefficients(arc_length_reparametrize(EllipseBody(2, 1).boundary()))


def test_symmetric_frame_shift(ellipse):
    for r, k in [(1, 3), (2, 5), (3, 8)]:
        fr = cr.symmetric_frame(ellipse, r, k)
        assert fr.shift_residual < 1e-9
        assert fr.curve.period == pytest.approx(2 * np.pi)
    with pytest.raises(PreconditionError):
        cr.symmetric_frame(ellipse, 2, 4)


@pytest.mark.parametrize("r,k", [(1, 3), (1, 4), (2, 5)])
def test_outer_check_ellipse(ellipse, r, k):
    rep = cr.outer_fourier_check(ellipse, r, k)
    assert rep.consistent and rep.verdict == "ellipse-consistent"
    assert rep.lam_ode == pytest.approx(np.tan(np.pi * r / k), abs=1e-12)
    assert rep.lam_fit == pytest.approx(rep.lam_theory, abs=1e-10)
    assert rep.identity_residual < 1e-9
    assert rep.radius_spread < 1e-10


@pytest.mark.parametrize("r,k", [(1, 3), (1, 4), (2, 5)])
def test_symplectic_check_ellipse(ellipse, r, k):
    rep = cr.symplectic_fourier_check(ellipse, r, k)
    assert rep.consistent
    assert rep.lam_ode == pytest.approx(2 * np.sin(2 * np.pi * r / k), abs=1e-12)
    assert rep.identity_residual < 1e-9


def test_outer_check_rejects_fourfold(fourfold):
    rep = cr.outer_fourier_check(fourfold, 1, 4)
    assert not rep.consistent
    assert rep.radius_spread > 1e-3
    for h in rep.harmonics:
        assert h["n"] % 4 in (1, 3)
        assert abs(h["residual"]) > 1e-3
    d = rep.to_dict()
    assert d["consistent"] is False and isinstance(d["c1"], (list, dict, float, str))


def test_symplectic_check_rejects_fivefold():
    c = SupportCurve(1.0, [0.0] * 4 + [0.02])
    rep = cr.symplectic_fourier_check(c, 1, 5)
    assert not rep.consistent
    assert all(h["n"] % 5 in (1, 4) for h in rep.harmonics)


def test_check_on_affine_image():
    body = LinearImage(disc(1.0), [[1.3, 0.7], [0.0, 0.6]])
    rep = cr.outer_fourier_check(body.boundary(), 1, 5)
    assert rep.consistent
    assert rep.lam_ode == pytest.approx(np.tan(np.pi / 5), abs=1e-11)


# ---------------------------------------------------------------------------
# Minkowski constancy and extra symmetry


@pytest.mark.parametrize("k", range(3, 13))
def test_b_minus_identity(k):
    for m in range(1, k):
        half, _ = cr.b_minus_identity(k, m)
        assert half < 1e-14


def test_b_minus_identity_full_angle_form_is_wrong():
    assert cr.b_minus_identity(4, 1)[1] == pytest.approx(np.sqrt(2) - 1, abs=1e-14)


def test_disc_constancy():
    dev, lam = cr.minkowski_constancy(disc(1.0), 5, 2)
    assert dev < 1e-13
    assert lam == pytest.approx(2 * np.sin(2 * np.pi / 5), abs=1e-13)


def test_lp_ball_constancy_fails():
    dev, _ = cr.minkowski_constancy(LpBall(4), 4)
    assert dev > 1e-2
    rep = cr.extra_symmetry_equivalence(LpBall(4), 4)
    assert rep.agree and rep.verdict == "fails"


def test_eightfold_passes(eightfold_body):
    rep = cr.extra_symmetry_equivalence(eightfold_body, 4)
    assert rep.symmetric and rep.constant and rep.verdict == "passes"
    assert rep.lam_est == pytest.approx(rep.lam_theory * 1.0, rel=0.05)
    assert rep.to_dict()["agree"] is True


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([3, 4, 5, 6]), st.integers(1, 3), st.floats(0.1, 0.8))
def test_symmetry_constancy_equivalence(k, mult, frac):
    j = k * mult
    eps = frac / (j * j - 1)
    body = SupportBody(SupportCurve(1.0, [0.0] * (j - 1) + [eps]))
    rep = cr.extra_symmetry_equivalence(body, k)
    assert rep.agree


def test_invariant_family(eightfold_body):
    fam = cr.construct_invariant_family(eightfold_body, 4, 1, samples=8)
    assert fam.criticality < 1e-8 and fam.action_spread < 1e-8
    assert fam.to_dict()["members"] == 8


def test_no_family_without_criterion(fourfold):
    with pytest.raises(PreconditionError, match="no invariant family"):
        cr.construct_invariant_family(SupportBody(fourfold), 4, 1)


def test_symmetric_orbit_actions(fourfold, eightfold_body):
    a, b = cr.symmetric_orbit_actions(SupportBody(fourfold), 4)
    assert abs(a.action - b.action) > 0.1
    a, b = cr.symmetric_orbit_actions(eightfold_body, 4)
    assert abs(a.action - b.action) < 1e-8


# ---------------------------------------------------------------------------
# polygon perimeters


def test_polyline_perimeter():
    assert cr.polyline_gauge_perimeter(SQUARE, SQUARE.vertices) == pytest.approx(8.0, abs=1e-15)


def test_polygon_orbit_perimeters():
    vals = [v for _, v in cr.polygon_orbit_perimeters()]
    np.testing.assert_allclose(vals, cr.PERIMETERS_EXPECTED, atol=1e-12)


def test_rounded_perimeters():
    vals = [v for _, v in cr.polygon_orbit_perimeters(0.05)]
    np.testing.assert_allclose(vals, cr.PERIMETERS_EXPECTED, atol=0.15)
