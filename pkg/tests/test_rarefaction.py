import numpy as np
import pytest

from rieff import CoreyModel, find_inflection, integrate_rarefaction
from rieff.errors import NotAnInflectionStop, StartDegenerate
from rieff.flux_model import speeds_at
from rieff.rarefaction import BACKWARD, FORWARD, cross_coincidence


def _strictly_monotone(seg):
    d = np.diff(seg.lambdas)
    return bool(np.all(d > 0)) if seg.direction == FORWARD else bool(np.all(d < 0))


def test_edge_fan_stops_at_inflection(unit_model):
    # lambda_f = f'(u1) peaks at 0.5, so increasing lambda from 0.6 heads to 0.5
    seg = integrate_rarefaction(unit_model, (0.6, 0.0), "f", FORWARD)
    assert seg.stop_reason == "inflection"
    U = find_inflection(unit_model, seg)
    assert U[0] == pytest.approx(0.5, abs=1e-8)
    assert U[1] == pytest.approx(0.0, abs=1e-12)
    assert _strictly_monotone(seg)


def test_refinement_within_one_step(unit_model):
    seg = integrate_rarefaction(unit_model, (0.6, 0.0), "f", FORWARD)
    U = find_inflection(unit_model, seg)
    assert np.hypot(*(np.array(U) - seg.points[-2])) <= seg.step + 1e-12


def test_edge_fan_backward_reaches_vertex(unit_model):
    seg = integrate_rarefaction(unit_model, (0.6, 0.0), "f", BACKWARD)
    assert seg.stop_reason in ("boundary", "coincidence")
    assert seg.end[0] == pytest.approx(1.0, abs=1e-6)
    assert _strictly_monotone(seg)
    with pytest.raises(NotAnInflectionStop):
        find_inflection(unit_model, seg)


def test_separatrix_fan_stays_on_line():
    m = CoreyModel(1.7, 1.7, 0.9)
    for U0, k in [((0.2, 0.2), "f"), ((0.4, 0.4), "s"), ((0.1, 0.1), "f")]:
        for d in (FORWARD, BACKWARD):
            try:
                seg = integrate_rarefaction(m, U0, k, d)
            except StartDegenerate:
                continue
            if len(seg) < 2:
                continue
            if abs(seg.points[1, 0] - seg.points[1, 1]) > 1e-6:
                continue       # the family transverse to the line
            assert np.max(np.abs(seg.points[:, 0] - seg.points[:, 1])) <= 1e-8


def test_umbilic_is_reported_as_coincidence(unit_model):
    seg = integrate_rarefaction(unit_model, (0.4, 0.4), "s", FORWARD)
    assert seg.stop_reason == "coincidence"
    assert seg.end == pytest.approx((1 / 3, 1 / 3), abs=1e-6)


def test_cross_coincidence_continues_with_other_family(unit_model):
    seg = integrate_rarefaction(unit_model, (0.4, 0.4), "s", FORWARD)
    heading = tuple(seg.tangents[-1])
    nxt = cross_coincidence(unit_model, seg.end, heading, "f")
    assert nxt.family == "f"
    assert np.max(np.abs(nxt.points[:, 0] - nxt.points[:, 1])) <= 1e-8
    assert nxt.stop_reason == "inflection"
    assert nxt.end[0] == pytest.approx(0.30651843, abs=1e-7)


def test_start_at_inflection_is_flagged(unit_model):
    seg = integrate_rarefaction(unit_model, (0.5, 0.0), "f", FORWARD)
    assert seg.start_at_inflection
    assert len(seg) == 1


def test_start_at_coincidence_needs_heading(unit_model):
    with pytest.raises(StartDegenerate):
        integrate_rarefaction(unit_model, (1 / 3, 1 / 3), "s", FORWARD)


def test_lambda_matches_points(rng):
    m = CoreyModel(0.8, 2.0, 1.4)
    for _ in range(5):
        U0 = tuple(rng.dirichlet([3, 3, 3])[:2])
        for k in ("s", "f"):
            for d in (FORWARD, BACKWARD):
                seg = integrate_rarefaction(m, U0, k, d)
                idx = 0 if k == "s" else 1
                lam = [speeds_at(m, *p)[idx] for p in seg.points]
                assert np.allclose(lam, seg.lambdas, atol=1e-12)
                if len(seg) > 1:
                    assert _strictly_monotone(seg)


def test_reversal_returns_to_start(unit_model):
    U0 = (0.6, 0.1)
    seg = integrate_rarefaction(unit_model, U0, "f", FORWARD, max_length=0.1)
    assert seg.stop_reason == "max_length"
    back = integrate_rarefaction(unit_model, tuple(seg.end), "f", BACKWARD, max_length=seg.arclength[-1])
    assert np.hypot(*(back.end - np.array(U0))) <= 1e-6
