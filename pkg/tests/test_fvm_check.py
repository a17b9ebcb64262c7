import math

import numpy as np
import pytest

from rieff import CoreyModel, l1_compare, simulate, solve_riemann
from rieff.errors import CFLViolation, ParameterError
from rieff.flux_model import FluxModel
from rieff.fvm_check import llf_fluxes, riemann_grid, step

from conftest import bl_flux


class Rotational(FluxModel):
    """Linear flux with complex characteristic speeds."""

    def flux(self, u1, u2):
        return -u2, u1

    def jacobian_components(self, u1, u2):
        z = 0.0 * np.asarray(u1)
        return z, z - 1.0, z + 1.0, z


def test_constant_state_is_preserved(unit_model):
    g = simulate(unit_model, (0.3, 0.2), (0.3, 0.2), 64, 0.3)
    assert np.all(g.u1 == 0.3) and np.all(g.u2 == 0.2)
    assert g.clamp_events == 0


def test_discrete_conservation(unit_model):
    g = riemann_grid((0.6, 0.3), (0.1, 0.05), 200)
    for _ in range(40):
        F1, F2, a = llf_fluxes(unit_model, g.u1, g.u2)
        dt = 0.5 * g.dx / a
        m0 = np.array([g.u1.sum(), g.u2.sum()]) * g.dx
        (l1, l2), (r1, r2) = step(unit_model, g, dt, clamp=False)
        m1 = np.array([g.u1.sum(), g.u2.sum()]) * g.dx
        assert np.allclose(m1 - m0, -dt * np.array([r1 - l1, r2 - l2]), atol=1e-12, rtol=0)


def test_edge_shock_position(unit_model):
    t = 0.5
    g = simulate(unit_model, (1.0, 0.0), (0.0, 0.0), 800, t)
    s = 1 / math.sqrt(2)
    x_exact = bl_flux(s) / s * t
    i = int(np.nonzero(g.u1 < 0.5 * s)[0][0])
    assert abs(g.x[i] - x_exact) <= 3 * g.dx
    assert np.max(np.abs(g.u2)) == 0.0


def test_l1_of_exact_profile_is_zero(unit_model):
    from rieff import sample_profile

    sol = solve_riemann(unit_model, (0.5, 0.5), (0.0, 0.0))
    g = riemann_grid((0.5, 0.5), (0.0, 0.0), 128)
    prof = np.array(sample_profile(sol, g.x / 0.4, unit_model))
    g.u1, g.u2 = prof[:, 0].copy(), prof[:, 1].copy()
    assert l1_compare(g, sol, 0.4, unit_model) == 0.0


def test_refinement_reduces_error(unit_model):
    sol = solve_riemann(unit_model, (1.0, 0.0), (0.0, 0.0))
    errs = [l1_compare(simulate(unit_model, (1, 0), (0, 0), n, 0.5), sol, 0.5, unit_model) for n in (50, 100, 200)]
    assert errs[0] > errs[1] > errs[2]


def test_complex_speeds_raise():
    with pytest.raises(CFLViolation):
        simulate(Rotational(), (0.3, 0.2), (0.1, 0.1), 32, 0.1)


@pytest.mark.parametrize("kw", [{"N": 8}, {"cfl": 0.8}, {"cfl": 0.0}])
def test_bad_grid(unit_model, kw):
    args = {"N": 64, "cfl": 0.5, **kw}
    with pytest.raises(ParameterError):
        simulate(unit_model, (0.3, 0.2), (0.1, 0.1), args["N"], 0.1, cfl=args["cfl"])


def test_bad_time(unit_model):
    with pytest.raises(ParameterError):
        simulate(unit_model, (0.3, 0.2), (0.1, 0.1), 64, 0.0)


def test_states_stay_in_triangle():
    m = CoreyModel(0.3, 4.0, 1.2)
    g = simulate(m, (0.0, 1.0), (1.0, 0.0), 200, 0.4)
    assert np.all(g.u1 >= 0) and np.all(g.u2 >= 0) and np.all(g.u1 + g.u2 <= 1 + 1e-15)
