import math

import numpy as np
import pytest

from rieff import CoreyModel, sample_profile, shock_speed, solve_riemann, wave_curve
from rieff.errors import NoIntersection
from rieff.flux_model import speeds_at
from rieff.hugoniot import BACKWARD, FORWARD, lax_classify
from rieff.scalar_hull import speeds_monotone

from conftest import bl_flux, separatrix_flux

NEARBY = [
    ((0.405, 0.2), (0.457, 0.24)),
    ((0.29, 0.287), (0.269, 0.311)),
    ((0.618, 0.163), (0.575, 0.2)),
    ((0.448, 0.491), (0.43, 0.522)),
]


@pytest.fixture(scope="module")
def model():
    return CoreyModel(1.0, 1.0, 1.0)


@pytest.fixture(scope="module")
def wag(model):
    return solve_riemann(model, (0.5, 0.5), (0.0, 0.0))


@pytest.fixture(scope="module")
def edge(model):
    return solve_riemann(model, (1.0, 0.0), (0.0, 0.0))


def _lam(model, U, k):
    return speeds_at(model, U[0], U[1])[0 if k == "s" else 1]


def test_constant_data(model):
    sol = solve_riemann(model, (0.3, 0.3), (0.3, 0.3))
    assert sol.slow_group == [] and sol.fast_group == []
    assert sol.UM == sol.UL
    assert sample_profile(sol, [-1, 0, 1], model) == [sol.UL] * 3


def test_wag_structure(model, wag):
    l3 = 1 - math.sqrt(2 / 3)
    assert wag.UM == pytest.approx((0, 0), abs=1e-14)
    assert wag.valid and wag.unique
    assert wag.fast_group == []
    kinds = [w.kind for w in wag.slow_group]
    assert kinds == ["rarefaction", "shock"]
    shock = wag.slow_group[1]
    assert 1 - shock.left[0] - shock.left[1] == pytest.approx(l3, abs=1e-8)
    # oracle: tangent chord of the closed-form separatrix flux
    sigma = (1 - separatrix_flux(l3)) / (1 - l3)
    assert shock.speed_left == pytest.approx(sigma, abs=1e-8)
    # tangent shock: characteristic on the left at the slow speed
    assert shock.speed_left == pytest.approx(_lam(model, shock.left, "s"), abs=1e-8)
    assert lax_classify(model, shock.left, shock.right, shock.speed_left).tag == "characteristic_left"


def test_edge_problem(model, edge):
    s = 1 / math.sqrt(2)
    assert edge.UM == pytest.approx((1, 0), abs=1e-14)
    assert edge.slow_group == []
    kinds = [w.kind for w in edge.fast_group]
    assert kinds == ["rarefaction", "shock"]
    shock = edge.fast_group[1]
    assert shock.left[0] == pytest.approx(s, abs=1e-8)
    assert shock.speed_left == pytest.approx(bl_flux(s) / s, abs=1e-8)
    assert lax_classify(model, shock.left, shock.right, shock.speed_left).tag == "characteristic_left"


def test_profile_far_field(model, wag, edge):
    for sol in (wag, edge):
        lo, hi = sample_profile(sol, [-10.0, 10.0], model)
        assert lo == sol.UL and hi == sol.UR


def test_profile_inverts_fan_speed(model, wag, edge):
    for sol in (wag, edge):
        for w in sol.waves:
            if w.kind != "rarefaction":
                continue
            for xi in np.linspace(w.speed_left, w.speed_right, 9)[1:-1]:
                U = sample_profile(sol, [xi], model)[0]
                lam = max(_lam(model, U, "s"), _lam(model, U, "f"), key=lambda v: -abs(v - xi))
                assert lam == pytest.approx(xi, abs=1e-6)


def test_profile_left_limit_at_shock(model, wag):
    shock = wag.slow_group[1]
    at, past = sample_profile(wag, [shock.speed_left, shock.speed_left + 1e-6], model)
    # the fan ends at the tangency only up to the hull's root accuracy
    assert np.hypot(at[0] - shock.left[0], at[1] - shock.left[1]) <= 1e-6
    assert past == wag.UR


@pytest.mark.parametrize("UL, UR", NEARBY)
def test_nearby_problems(model, UL, UR):
    sol = solve_riemann(model, UL, UR)
    assert sol.valid
    for grp in (sol.slow_group, sol.fast_group):
        sp = [s for w in grp for s in (w.speed_left, w.speed_right)]
        assert all(b >= a - 1e-8 for a, b in zip(sp[:-1], sp[1:]))
    if sol.slow_group and sol.fast_group:
        assert sol.slow_group[-1].speed_right <= sol.fast_group[0].speed_left + 1e-8
        # strictly between the groups the profile is the middle state
        xi = 0.5 * (sol.slow_group[-1].speed_right + sol.fast_group[0].speed_left)
        if sol.slow_group[-1].speed_right < xi < sol.fast_group[0].speed_left:
            assert sample_profile(sol, [xi], model)[0] == pytest.approx(sol.UM, abs=1e-12)
    for w in sol.waves:
        if w.kind == "shock":
            s, res = shock_speed(model, w.left, w.right)
            assert res <= 1e-8
            assert s == pytest.approx(w.speed_left, abs=1e-12)
            assert lax_classify(model, w.left, w.right, s, FORWARD).admissible


@pytest.mark.parametrize("UL, UR", NEARBY)
def test_profile_jumps_satisfy_rh(model, UL, UR):
    sol = solve_riemann(model, UL, UR)
    speeds = [s for w in sol.waves for s in (w.speed_left, w.speed_right)]
    xi = np.linspace(min(speeds) - 0.1, max(speeds) + 0.1, 4001)
    prof = np.array(sample_profile(sol, xi, model))
    jumps = np.nonzero(np.hypot(*np.diff(prof, axis=0).T) > 1e-3)[0]
    for i in jumps:
        wave = min((w for w in sol.waves if w.kind == "shock"), key=lambda w: abs(w.speed_left - xi[i]))
        fa, fb = model.flux(*prof[i]), model.flux(*prof[i + 1])
        d = prof[i + 1] - prof[i]
        r = math.hypot(fb[0] - fa[0] - wave.speed_left * d[0], fb[1] - fa[1] - wave.speed_left * d[1])
        assert r <= 1e-8


def test_far_apart_states_are_reported(model):
    with pytest.raises(NoIntersection):
        solve_riemann(model, (0.3, 0.2), (0.1, 0.6))


def test_separatrix_wave_curve_stays_on_line():
    m = CoreyModel(1.4, 1.4, 0.7)
    U0 = (0.45, 0.45)
    wc = wave_curve(m, U0, "s", FORWARD)
    assert wc.arms
    for arm in wc.arms:
        assert np.max(np.abs(arm.points[:, 0] - arm.points[:, 1])) <= 1e-8


def test_oil_vertex_curves(model):
    fast = wave_curve(model, (0, 0), "f", BACKWARD)
    dirs = sorted(tuple(np.round(a.points[1] - a.points[0], 12) > 0) for a in fast.arms)
    assert dirs == [(False, True), (True, False)]      # the two edges
    slow = wave_curve(model, (0, 0), "s", BACKWARD)
    assert len(slow.arms) == 1
    d = slow.arms[0].points[1] - slow.arms[0].points[0]
    assert d[0] == pytest.approx(d[1], abs=1e-12)


def test_wave_groups_along_curve_are_monotone(model):
    wc = wave_curve(model, (0.3, 0.25), "s", FORWARD)
    for i, arm in enumerate(wc.arms):
        a, b = arm.interval
        for ell in np.linspace(a, b, 12):
            assert speeds_monotone(wc.group_to(i, ell), eps=1e-9)
