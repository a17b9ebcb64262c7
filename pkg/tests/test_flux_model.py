import math

import numpy as np
import pytest

from rieff import CoreyModel, char_fields, eval_flux, jacobian, nonlinearity
from rieff.config import DEFAULT_TOL
from rieff.errors import DomainError, ParameterError
from rieff.flux_model import State, check_state, speeds_at

from conftest import bl_dflux


def test_symmetric_point_has_equal_fluxes(unit_model):
    f = eval_flux(unit_model, (1 / 3, 1 / 3))
    assert np.allclose(f, (1 / 3, 1 / 3, 1 / 3), atol=1e-15)


def test_oil_vertex_flux(unit_model):
    assert eval_flux(unit_model, (0.0, 0.0)) == (0.0, 0.0, 1.0)


def test_hand_evaluated_flux(unit_model):
    f1, f2, f3 = eval_flux(unit_model, (0.3, 0.3))
    assert f1 == pytest.approx(0.09 / 0.34, abs=1e-15)
    assert f2 == pytest.approx(0.09 / 0.34, abs=1e-15)
    assert f3 == pytest.approx(0.16 / 0.34, abs=1e-15)


def test_fluxes_sum_to_one(rng):
    m = CoreyModel(2.0, 0.7, 3.1)
    for _ in range(50):
        u = rng.dirichlet([1, 1, 1])
        assert sum(eval_flux(m, u[:2])) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("U", [(1.2, 0.0), (-0.01, 0.2), (0.6, 0.5)])
def test_outside_triangle_is_rejected(unit_model, U):
    with pytest.raises(DomainError):
        eval_flux(unit_model, U)


def test_domain_slack_is_accepted():
    assert check_state((-5e-13, 0.5)) == State(-5e-13, 0.5)


@pytest.mark.parametrize("bad", [(0, 1, 1), (1, -2, 1), (1, 1, float("nan")), (1, 1, "2")])
def test_bad_coefficients(bad):
    with pytest.raises(ParameterError):
        CoreyModel(*bad)


def test_edge_jacobian_row_two_vanishes(unit_model):
    J = jacobian(unit_model, (0.5, 0.0))
    assert np.allclose(J[1], 0.0, atol=1e-15)
    assert J[0, 0] == pytest.approx(2.0, abs=1e-14)


def test_jacobian_matches_finite_differences(rng):
    h = 1e-6
    for A, B, C in [(1, 1, 1), (0.3, 2.0, 4.5), (5, 0.2, 1)]:
        m = CoreyModel(A, B, C)
        for _ in range(200):
            u1, u2 = rng.dirichlet([1, 1, 1])[:2]
            J = jacobian(m, (u1, u2))
            fd = np.column_stack([
                (np.array(m.flux(u1 + h, u2)) - m.flux(u1 - h, u2)) / (2 * h),
                (np.array(m.flux(u1, u2 + h)) - m.flux(u1, u2 - h)) / (2 * h),
            ])
            assert np.max(np.abs(J - fd)) < 1e-6


def test_edge_speeds(unit_model):
    cf = char_fields(unit_model, (0.5, 0.0))
    assert cf.lambda_s == pytest.approx(0.0, abs=1e-15)
    assert cf.lambda_f == pytest.approx(2.0, abs=1e-14)
    # fast speed on the edge is the scalar derivative
    for s in (0.1, 0.3, 0.8):
        assert speeds_at(unit_model, s, 0.0)[1] == pytest.approx(bl_dflux(s), abs=1e-13)


def test_symmetric_line_eigenvectors():
    m = CoreyModel(1.5, 1.5, 0.8)
    cf = char_fields(m, (0.2, 0.2))
    dirs = sorted(abs(r[0] * r[1]) for r in (cf.r_s, cf.r_f))
    # one eigenvector along (1,1), the other along (1,-1): |r1 r2| = 1/2 for both
    assert dirs == pytest.approx([0.5, 0.5], abs=1e-12)
    dots = sorted(abs(r[0] + r[1]) / math.sqrt(2) for r in (cf.r_s, cf.r_f))
    assert dots == pytest.approx([0.0, 1.0], abs=1e-12)


def test_eigen_residual_and_orientation(rng):
    m = CoreyModel(1.3, 0.6, 2.2)
    for _ in range(200):
        U = tuple(rng.dirichlet([1, 1, 1])[:2])
        cf = char_fields(m, U)
        J = jacobian(m, U)
        assert cf.lambda_s <= cf.lambda_f
        for k in ("s", "f"):
            r = np.array(cf.vector(k))
            lam = cf.speed(k)
            assert np.linalg.norm(r) == pytest.approx(1.0, abs=1e-14)
            assert np.linalg.norm(J @ r - lam * r) <= 1e-10 * (1 + abs(lam))
            if not cf.near_coincident:
                assert nonlinearity(m, U, k, direction=tuple(r)) >= -DEFAULT_TOL.eps_nl


def test_edge_inflection_and_sign_change(unit_model):
    assert nonlinearity(unit_model, (0.5, 0.0), "f") == pytest.approx(0.0, abs=1e-8)
    left = nonlinearity(unit_model, (0.45, 0.0), "f", direction=(1, 0))
    right = nonlinearity(unit_model, (0.55, 0.0), "f", direction=(1, 0))
    assert left > 0 > right


def test_nonlinearity_is_directional_difference(unit_model):
    U = (0.25, 0.4)
    cf = char_fields(unit_model, U)
    r = cf.r_f
    h = 1e-4
    fd = (speeds_at(unit_model, U[0] + h * r[0], U[1] + h * r[1])[1]
          - speeds_at(unit_model, U[0] - h * r[0], U[1] - h * r[1])[1]) / (2 * h)
    assert nonlinearity(unit_model, U, "f", direction=r) == pytest.approx(fd, abs=1e-6)


def test_vertices_are_coincident(unit_model):
    for V in [(0, 0), (1, 0), (0, 1)]:
        assert char_fields(unit_model, V).near_coincident
