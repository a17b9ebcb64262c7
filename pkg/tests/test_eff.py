import math

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from rieff import U1, U2, U3, CoreyModel, build_eff, integrate_rarefaction, lift_rarefaction, lift_shock
from rieff import lifting_identity_error, liu_trim, make_base_curve, trace_hugoniot, welge_point
from rieff.config import DEFAULT_TOL
from rieff.eff import ParamCoordinate, as_coord, flux_combination, project_coord
from rieff.errors import NonMonotoneCoordinate, ParameterError
from rieff.flux_model import speeds_at
from rieff.hugoniot import BACKWARD, FORWARD
from rieff.validation import hyperbola_coefficients, oil_vertex_effs

from conftest import separatrix_flux

FINE = DEFAULT_TOL.with_overrides(h_max=2e-3)


def _branch_along(branches, d):
    d = np.asarray(d, float) / np.hypot(*d)
    return max(branches, key=lambda b: float(np.dot(b.start_direction, d)))


@pytest.fixture(scope="module")
def separatrix():
    m = CoreyModel(1.0, 1.0, 1.0)
    return m, oil_vertex_effs(m)[2]


@pytest.fixture(scope="module")
def hyperbola():
    m = CoreyModel(1.0, 1.0, 1.0)
    return m, build_eff(m, (0.7, 0.0), "s", BACKWARD, U2, shock_h_max=2e-3)


def test_presets():
    assert (U1.alpha0, U1.alpha1, U1.alpha2) == (0, 1, 0)
    assert (U2.alpha0, U2.alpha1, U2.alpha2) == (0, 0, 1)
    assert (U3.alpha0, U3.alpha1, U3.alpha2) == (1, -1, -1)
    assert as_coord("u3") == U3
    with pytest.raises(ParameterError):
        ParamCoordinate(0.5, 0.0, 0.0)


def test_projection_at_oil_vertex():
    assert project_coord(U3, (0, 0)) == 1
    assert flux_combination(U3, (0, 0, 1)) == 1
    assert project_coord(U1, (0.3, 0.2)) == 0.3
    assert flux_combination(U1, (0.4, 0.1, 0.5)) == 0.4
    assert flux_combination(U2, (0.4, 0.1, 0.5)) == 0.1


def test_separatrix_eff_matches_closed_form(separatrix):
    m, eff = separatrix
    assert eff.interval == pytest.approx((0.0, 1.0), abs=1e-9)
    ell = np.linspace(0, 1, 801)
    assert np.max(np.abs(eff(ell) - separatrix_flux(ell))) <= 1e-6
    bws = [b for b in eff.breakpoints if b.tag == "bethe_wendroff"]
    assert len(bws) == 1
    assert bws[0].ell == pytest.approx(1 - math.sqrt(2 / 3), abs=1e-7)


def test_welge_equals_bethe_wendroff(separatrix):
    m, eff = separatrix
    bw = [b for b in eff.breakpoints if b.tag == "bethe_wendroff"][0]
    assert abs(welge_point(eff, 1.0) - bw.ell) <= 1e-7


def test_breakpoint_states_do_not_depend_on_coordinate():
    m = CoreyModel(1.0, 1.0, 1.0)
    brs = trace_hugoniot(m, (0, 0), tol=FINE)
    a = build_eff(m, (0, 0), "s", BACKWARD, U3, direction=(1, 1), hugoniot_branches=brs)
    b = build_eff(m, (0, 0), "s", BACKWARD, U1, direction=(1, 1), hugoniot_branches=brs)
    sa = [bp.state for bp in a.breakpoints]
    sb = [bp.state for bp in b.breakpoints]
    assert len(sa) == len(sb)
    for x, y in zip(sa, sb):
        assert np.hypot(x[0] - y[0], x[1] - y[1]) <= 1e-7


def test_hyperbola_eff_is_f2_on_quadratic_root(hyperbola):
    m, eff = hyperbola
    shock = [p for p in eff.pieces if p.kind == "shock"][0]
    ell = shock.ell
    ell = ell[ell > 1e-6]
    a, b, c = hyperbola_coefficients(0.7, ell)
    g1 = (-b + np.sqrt(b * b - 4 * a * c)) / (2 * a)
    f2 = m.flux(g1, ell)[1]
    assert np.max(np.abs(eff(ell) - f2)) <= 1e-8


def test_hyperbola_needs_u2_coordinate(unit_model):
    brs = trace_hugoniot(unit_model, (0.7, 0.0), tol=FINE)
    hyp = [b for b in brs if np.max(b.points[:, 1]) > 1e-9][0]
    with pytest.raises(NonMonotoneCoordinate):
        make_base_curve((0.7, 0.0), [lift_shock(unit_model, (0.7, 0.0), hyp, U1)], U1)
    arc = liu_trim(unit_model, hyp, BACKWARD)
    base = make_base_curve((0.7, 0.0), [lift_shock(unit_model, (0.7, 0.0), arc, U2)], U2)
    assert np.all(np.diff(base.ell_values) > 0)


def test_build_with_wrong_coordinate_is_annotated(unit_model):
    with pytest.raises(NonMonotoneCoordinate) as info:
        build_eff(unit_model, (0.7, 0.0), "s", BACKWARD, U1)
    assert info.value.index >= 1


def test_single_point_base_curve(unit_model):
    seg = integrate_rarefaction(unit_model, (0.5, 0.0), "f", FORWARD)
    piece = lift_rarefaction(unit_model, seg, U1, f_start=0.5)
    assert piece.f.tolist() == [0.5]
    base = make_base_curve((0.5, 0.0), [piece], U1)
    assert base.interval == (0.5, 0.5)


def test_lift_shock_edge(unit_model):
    edge = _branch_along(trace_hugoniot(unit_model, (0, 0), tol=FINE), (1, 0))
    piece = lift_shock(unit_model, (0, 0), edge, U1)
    assert piece.f[0] == pytest.approx(0.0, abs=1e-15) or piece.ell[0] > 0
    i = int(np.argmin(np.abs(piece.ell - 0.5)))
    assert piece.f[i] == pytest.approx(m_f1(unit_model, piece.points[i]), abs=1e-12)
    eff = build_eff(unit_model, (0, 0), "f", BACKWARD, U1, direction=(1, 0))
    assert eff(0.5) == pytest.approx(0.5, abs=1e-8)
    assert eff(0.0) == pytest.approx(0.0, abs=1e-15)


def m_f1(model, U):
    return model.flux(U[0], U[1])[0]


def _lift(model, U0, k, h):
    seg = integrate_rarefaction(model, U0, k, FORWARD, max_length=0.2, h=h)
    t = seg.tangents[0]
    coord = U1 if abs(t[0]) > abs(t[1]) else U2
    return lift_rarefaction(model, seg, coord, f_start=0.0)


@pytest.mark.parametrize("U0, k", [((0.2, 0.5), "f"), ((0.6, 0.1), "s"), ((0.6, 0.1), "f")])
def test_rarefaction_lift_slope_is_speed(unit_model, U0, k):
    piece = _lift(unit_model, U0, k, None)
    o = np.argsort(piece.ell)
    slope = CubicSpline(piece.ell[o], piece.f[o])(piece.ell, 1)
    lam = [speeds_at(unit_model, *p)[0 if k == "s" else 1] for p in piece.points]
    assert np.max(np.abs(slope - lam)[2:-2]) <= 1e-5
    assert np.allclose(piece.fprime, lam, atol=1e-14)


def test_rarefaction_lift_difference_quotients_converge(unit_model):
    errs = []
    for h in (1e-3, 5e-4):
        p = _lift(unit_model, (0.6, 0.1), "s", h)
        d = np.diff(p.f) / np.diff(p.ell)
        errs.append(np.max(np.abs(d - 0.5 * (p.fprime[1:] + p.fprime[:-1]))))
    assert errs[1] < errs[0] / 3.5


def test_lifting_identity(separatrix, hyperbola):
    for m, eff in (separatrix, hyperbola):
        assert lifting_identity_error(m, eff, "shock") <= 1e-10
        assert lifting_identity_error(m, eff, "rarefaction") <= 1e-6


def test_smooth_across_coincidence_and_inflection(unit_model):
    eff = build_eff(unit_model, (0.5, 0.5), "s", FORWARD, U3, side="rarefaction")
    tags = [b.tag for b in eff.breakpoints]
    assert "coincidence" in tags and "inflection" in tags
    for b in eff.breakpoints:
        assert abs(b.jump_f) <= 1e-8
        assert abs(b.jump_fprime) <= 1e-6
    ell = np.linspace(*eff.interval, 401)
    assert np.max(np.abs(eff(ell) - separatrix_flux(ell))) <= 1e-6


def test_edge_effs_other_coefficients():
    A, B, C = 2.0, 1.0, 1.0
    m = CoreyModel(A, B, C)
    e1, e2, e3 = oil_vertex_effs(m)
    assert welge_point(e1, 1.0) == pytest.approx(1 - math.sqrt(1 / 3), abs=1e-7)
    for e in (e1, e2, e3):
        for b in e.breakpoints:
            assert abs(b.jump_f) <= 1e-8 and abs(b.jump_fprime) <= 1e-6


def test_state_interpolation_on_base_curve(separatrix):
    m, eff = separatrix
    for ell in (0.05, 0.3, 0.77):
        U = eff.state_at(ell)
        assert U[0] == pytest.approx(U[1], abs=1e-9)
        assert 1 - U[0] - U[1] == pytest.approx(ell, abs=1e-9)
