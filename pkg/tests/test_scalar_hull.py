import math

import numpy as np
import pytest

from rieff import SampledFlux, corey_welge_closed_form, hull_solution, welge_point
from rieff.errors import NoTangency, ParameterError
from rieff.scalar_hull import speeds_monotone

from conftest import separatrix_flux


def _f3():
    h = 1e-6

    def d(x):
        return (separatrix_flux(x + h) - separatrix_flux(x - h)) / (2 * h)

    return SampledFlux.from_function(separatrix_flux, d, 0.0, 1.0, n=4001)


def _square():
    return SampledFlux.from_function(lambda x: x * x, lambda x: 2 * x, 0.0, 1.0, n=201)


def _dense_lower_hull_tangency(f, a, b, n=100001):
    """Brute-force oracle: last point where the lower hull touches f."""
    x = np.linspace(a, b, n)
    y = f(x)
    hull = []
    for i in range(n):
        while len(hull) >= 2:
            j, k = hull[-2], hull[-1]
            if (x[k] - x[j]) * (y[i] - y[j]) - (y[k] - y[j]) * (x[i] - x[j]) <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    gaps = np.diff(hull)
    j = int(np.argmax(gaps > 1))
    return x[hull[j]]


def test_closed_forms():
    l1, l2, l3 = corey_welge_closed_form(1, 1, 1)
    assert l1 == pytest.approx(1 - math.sqrt(0.5), abs=1e-15)
    assert l2 == l1
    assert l3 == pytest.approx(1 - math.sqrt(2 / 3), abs=1e-15)
    assert corey_welge_closed_form(2, 1, 1)[0] == pytest.approx(0.4226497, abs=1e-7)


@pytest.mark.parametrize("bad", [(0, 1, 1), (1, -1, 1), (1, 1, float("inf"))])
def test_closed_form_rejects_bad_input(bad):
    with pytest.raises(ParameterError):
        corey_welge_closed_form(*bad)


def test_closed_form_ordering(rng):
    for A, B, C in rng.uniform(0.2, 5.0, (200, 3)):
        l1, l2, l3 = corey_welge_closed_form(float(A), float(B), float(C))
        assert l3 < min(l1, l2)


def test_edge_welge_from_sampled_flux():
    # edge flux in the u3 coordinate, reference at l = 1
    def f(x):
        s = 1 - x
        return 1 - s * s / (s * s + x * x)

    h = 1e-6
    flux = SampledFlux.from_function(f, lambda x: (f(x + h) - f(x - h)) / (2 * h), 0.0, 1.0, n=2001)
    l = welge_point(flux, 1.0)
    assert l == pytest.approx(1 - math.sqrt(0.5), abs=1e-7)
    chord = (flux(l) - flux(1.0)) / (l - 1.0)
    assert abs(flux.derivative(l) - chord) <= 1e-10


def test_convex_flux_has_no_tangency():
    with pytest.raises(NoTangency):
        welge_point(_square(), 1.0)


def test_square_proxy_shock():
    w = hull_solution(_square(), 1.0, 0.0)
    assert len(w) == 1 and w[0].kind == "shock"
    assert w[0].speed_left == pytest.approx(1.0, abs=1e-14)


def test_square_proxy_rarefaction():
    w = hull_solution(_square(), 0.0, 1.0)
    assert len(w) == 1 and w[0].kind == "rarefaction"
    assert (w[0].speed_left, w[0].speed_right) == pytest.approx((0.0, 2.0), abs=1e-12)


def test_separatrix_hull_against_dense_oracle():
    flux = _f3()
    waves = hull_solution(flux, 0.0, 1.0)
    assert [w.kind for w in waves] == ["rarefaction", "shock"]
    l3 = 1 - math.sqrt(2 / 3)
    assert waves[0].ell_right == pytest.approx(l3, abs=1e-8)
    assert waves[0].ell_right == pytest.approx(_dense_lower_hull_tangency(separatrix_flux, 0, 1), abs=2e-5)
    sigma = waves[1].speed_left
    assert sigma == pytest.approx(flux.derivative(l3), abs=1e-7)
    assert sigma == pytest.approx((1 - separatrix_flux(l3)) / (1 - l3), abs=1e-9)
    assert speeds_monotone(waves)


def test_random_hulls_are_monotone(rng):
    flux = _f3()
    for a, b in rng.uniform(0, 1, (100, 2)):
        waves = hull_solution(flux, a, b)
        assert speeds_monotone(waves)
        # waves tile the interval from ellL to ellR
        assert waves[0].ell_left == pytest.approx(a, abs=1e-15)
        assert waves[-1].ell_right == pytest.approx(b, abs=1e-15)
        for w in waves:
            if w.kind == "shock":
                chord = (flux(w.ell_right) - flux(w.ell_left)) / (w.ell_right - w.ell_left)
                assert w.speed_left == pytest.approx(float(chord), abs=1e-12)
            else:
                assert w.speed_left == pytest.approx(float(flux.derivative(w.ell_left)), abs=1e-12)


def test_empty_problem():
    assert hull_solution(_square(), 0.3, 0.3) == []
