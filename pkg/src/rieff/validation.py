"""Acceptance criteria shared by the test suite and ``rieff validate``.

Each ``criterion_*`` function returns a :class:`CriterionResult`; nothing is
raised on a failed check so the caller can report every criterion.
"""

from __future__ import annotations

import functools
import math
import os
import time
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL
from .eff import U2, U3, build_eff, lifting_identity_error
from .errors import RieffError, StartDegenerate
from .flux_model import CoreyModel, family_index, speeds_at
from .fvm_check import l1_compare, simulate
from .hugoniot import BACKWARD, FORWARD, find_bethe_wendroff, liu_trim, shock_speed, trace_hugoniot
from .rarefaction import integrate_rarefaction
from .riemann import solve_riemann
from .scalar_hull import corey_welge_closed_form, hull_solution, speeds_monotone, welge_point

O = (0.0, 0.0)
SHOCK_TOL = DEFAULT_TOL.with_overrides(h_max=2e-3)
WAG = ((0.5, 0.5), O)
EDGE_BL = ((1.0, 0.0), O)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number}: {self.title} ({self.detail}; {self.seconds:.2f} s)"


def seed() -> int:
    return int(os.environ.get("RIEFF_SEED", "0"))


def random_states(rng, n, margin=0.02):
    """Uniform samples of the triangle kept ``margin`` away from its edges."""
    out = []
    while len(out) < n:
        u = rng.dirichlet([1.0, 1.0, 1.0])
        if u.min() > margin:
            out.append((float(u[0]), float(u[1])))
    return out


def oil_vertex_effs(model, branches=None):
    """The two edge EFFs and the separatrix EFF reaching O, in the u3 coordinate."""
    A, B = model.A, model.B
    if branches is None:
        branches = trace_hugoniot(model, O, tol=SHOCK_TOL)
    out = []
    for k, d in (("f", (1.0, 0.0)), ("f", (0.0, 1.0)), ("s", (B, A))):
        out.append(build_eff(model, O, k, BACKWARD, U3, direction=d, hugoniot_branches=branches))
    return out


@functools.lru_cache(maxsize=4)
def welge_study(rng_seed=0, n=20):
    """Numerical vs closed-form Welge points for random Corey coefficients."""
    rng = np.random.default_rng(rng_seed)
    rows = []
    t0 = time.perf_counter()
    for _ in range(n):
        A, B, C = (float(v) for v in rng.uniform(0.2, 5.0, 3))
        model = CoreyModel(A, B, C)
        exact = corey_welge_closed_form(A, B, C)
        effs = oil_vertex_effs(model)
        found = tuple(welge_point(e, 1.0) for e in effs)
        rows.append(((A, B, C), exact, found))
    return rows, time.perf_counter() - t0


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*a, **kw):
        t0 = time.perf_counter()
        res = fn(*a, **kw)
        res.seconds = time.perf_counter() - t0
        return res

    return wrapper


@_timed
def criterion_1(rng_seed=None):
    rows, secs = welge_study(seed() if rng_seed is None else rng_seed)
    err = max(abs(f - e) for _, ex, fd in rows for f, e in zip(fd, ex))
    ok = err <= 1e-7 and secs < 5.0
    return CriterionResult(1, "Welge points match closed forms", ok,
                           f"max error {err:.2e} over {len(rows)} triples, build {secs:.2f} s")


@_timed
def criterion_2(rng_seed=None):
    rows, _ = welge_study(seed() if rng_seed is None else rng_seed)
    margin = min(min(ex[0], ex[1]) - ex[2] for _, ex, _ in rows)
    margin_num = min(min(fd[0], fd[1]) - fd[2] for _, _, fd in rows)
    ok = margin > 0 and margin_num > 0
    return CriterionResult(2, "separatrix Welge point below both edge ones", ok,
                           f"min margin {margin:.3e} (closed form), {margin_num:.3e} (numerical)")


def separatrix_eff():
    model = CoreyModel(1.0, 1.0, 1.0)
    return model, oil_vertex_effs(model)[2]


def hyperbola_eff(m=0.7):
    model = CoreyModel(1.0, 1.0, 1.0)
    return model, build_eff(model, (m, 0.0), "s", BACKWARD, U2, shock_h_max=2e-3)


@_timed
def criterion_3():
    worst = []
    ok = True
    for name, (model, eff) in (("separatrix", separatrix_eff()), ("hyperbola", hyperbola_eff())):
        es = lifting_identity_error(model, eff, "shock")
        er = lifting_identity_error(model, eff, "rarefaction")
        ok &= es <= 1e-10 and er <= 1e-6
        worst.append(f"{name}: shock {es:.1e}, rarefaction {er:.1e}")
    return CriterionResult(3, "lifting identity", ok, "; ".join(worst))


def hyperbola_coefficients(m, u2, A=1.0, B=1.0, C=1.0):
    """Coefficients of a u1^2 + b u1 + c = 0 for the detached locus of (m, 0)."""
    f1R = A * m * m / (A * m * m + C * (1 - m) ** 2)
    a = A - (A + C) * f1R
    b = 2 * C * f1R - (B + 2 * C * f1R) * u2
    c = -(B + C) * f1R * u2 ** 2 + (2 * C * f1R + B * m) * u2 - C * f1R
    return a, b, c


@_timed
def criterion_4():
    model = CoreyModel(1.0, 1.0, 1.0)
    res_max = g_max = 0.0
    skipped = 0
    for m in (0.3, 0.5, 0.7):
        for br in trace_hugoniot(model, (m, 0.0), tol=SHOCK_TOL):
            P = br.points
            off = P[:, 1] > 1e-9
            if not np.any(off):
                continue    # the edge itself
            u1, u2 = P[off, 0], P[off, 1]
            a, b, c = hyperbola_coefficients(m, u2)
            res_max = max(res_max, float(np.max(np.abs(a * u1 * u1 + b * u1 + c))))
            # quadratic-formula root, written to survive a -> 0
            arc = liu_trim(model, br, BACKWARD).points
            arc = arc[arc[:, 1] > 1e-9]
            a, b, c = hyperbola_coefficients(m, arc[:, 1])
            den = -b - np.sqrt(np.maximum(b * b - 4 * a * c, 0.0))
            good = np.abs(den) > 1e-6
            skipped += int(np.count_nonzero(~good))
            g1 = 2 * c[good] / den[good]
            g_max = max(g_max, float(np.max(np.abs(g1 - arc[good, 0]))))
    ok = res_max <= 1e-8 and g_max <= 1e-7
    return CriterionResult(4, "Hugoniot hyperbola", ok,
                           f"quadratic residual {res_max:.1e}, gamma1 error {g_max:.1e}, "
                           f"{skipped} points where the root formula is singular skipped")


@_timed
def criterion_5():
    model = CoreyModel(1.0, 1.0, 1.0)
    worst = 0.0
    fams = []
    for eff in oil_vertex_effs(model):
        bws = [b for b in eff.breakpoints if b.tag == "bethe_wendroff"]
        fams.append(bws[0].family_after if bws else None)
        for b in bws:
            s, _ = shock_speed(model, eff.reference, b.state)
            lam = speeds_at(model, b.state[0], b.state[1])[family_index(b.family_after)]
            worst = max(worst, abs(s - lam))
    refs = [(0.7, 0.0), (0.3, 0.0), (0.3, 0.2), (0.2, 0.5), (0.6, 0.3)]
    count = 0
    for R in refs:
        for br in trace_hugoniot(model, R, tol=SHOCK_TOL):
            for p in find_bethe_wendroff(model, br):
                s, _ = shock_speed(model, R, p.state)
                lam = speeds_at(model, p.state[0], p.state[1])[family_index(p.family)]
                worst = max(worst, abs(s - lam))
                count += 1
    ok = worst <= 1e-8 and fams == ["f", "f", "s"]
    return CriterionResult(5, "Bethe-Wendroff consistency", ok,
                           f"max |sigma - lambda| {worst:.1e} over {count + 3} points, "
                           f"families edge/edge/separatrix = {'/'.join(map(str, fams))}")


def smoothness_effs():
    model = CoreyModel(1.0, 1.0, 1.0)
    effs = oil_vertex_effs(model)
    effs.append(hyperbola_eff()[1])
    effs.append(build_eff(model, (0.5, 0.5), "s", FORWARD, U3, side="rarefaction"))
    effs.append(build_eff(model, (0.7, 0.0), "s", BACKWARD, U2, side="rarefaction"))
    m2 = CoreyModel(2.0, 1.0, 0.5)
    effs.extend(oil_vertex_effs(m2))
    return effs


@_timed
def criterion_6():
    jf = jd = 0.0
    n = 0
    for eff in smoothness_effs():
        for b in eff.breakpoints:
            jf = max(jf, abs(b.jump_f))
            jd = max(jd, abs(b.jump_fprime))
            n += 1
    ok = jf <= 1e-8 and jd <= 1e-6 and n > 0
    return CriterionResult(6, "EFF smoothness across breakpoints", ok,
                           f"{n} breakpoints, max jump f {jf:.1e}, f' {jd:.1e}")


@_timed
def criterion_7():
    model = CoreyModel(1.0, 1.0, 1.0)
    sol = solve_riemann(model, *WAG)
    worst = 0.0
    groups = 0
    for eff, grp, a, b in ((sol.slow_eff, sol.slow_group, sol.UL, sol.UM),
                           (sol.fast_eff, sol.fast_group, sol.UM, sol.UR)):
        if not grp:
            continue
        groups += 1
        hull = hull_solution(eff, eff.coord.project(a), eff.coord.project(b))
        if len(hull) != len(grp):
            worst = math.inf
            continue
        for hw, w in zip(hull, grp):
            worst = max(worst, abs(hw.speed_left - w.speed_left), abs(hw.speed_right - w.speed_right))
    ok = worst <= 1e-6 and sol.valid and groups > 0
    return CriterionResult(7, "scalar-system speed equivalence (WAG)", ok,
                           f"{groups} group(s), max speed difference {worst:.1e}, valid={sol.valid}")


@_timed
def criterion_8(t=0.5, sizes=(100, 200, 400, 800)):
    model = CoreyModel(1.0, 1.0, 1.0)
    t0 = time.perf_counter()
    ok = True
    parts = []
    for name, (UL, UR) in (("edge", EDGE_BL), ("WAG", WAG)):
        sol = solve_riemann(model, UL, UR)
        errs = [l1_compare(simulate(model, UL, UR, N, t), sol, t, model) for N in sizes]
        mono = all(b < a for a, b in zip(errs[:-1], errs[1:]))
        ok &= mono and errs[-1] < 0.05
        parts.append(f"{name}: " + ", ".join(f"{e:.4f}" for e in errs))
    ok &= time.perf_counter() - t0 < 60.0
    return CriterionResult(8, "finite-volume cross-check", ok, "; ".join(parts))


def _fd_jacobian(model, u1, u2, h=1e-6):
    a = np.array(model.flux(u1 + h, u2))
    b = np.array(model.flux(u1 - h, u2))
    c = np.array(model.flux(u1, u2 + h))
    d = np.array(model.flux(u1, u2 - h))
    # (component, state, variable) -> (state, component, variable)
    return np.moveaxis(np.stack([(a - b) / (2 * h), (c - d) / (2 * h)], axis=-1), 1, 0)


def property_rh(models, refs):
    worst = 0.0
    for model in models:
        for R in refs:
            for br in trace_hugoniot(model, R, tol=SHOCK_TOL):
                for U, s in zip(br.points[1:], br.sigmas[1:]):
                    f0 = model.flux(*R)
                    f1 = model.flux(*U)
                    r = math.hypot(f1[0] - f0[0] - s * (U[0] - R[0]), f1[1] - f0[1] - s * (U[1] - R[1]))
                    worst = max(worst, r)
    return worst


def property_rarefaction(models, starts):
    bad = 0
    n = 0
    for model in models:
        for U in starts:
            for k in ("s", "f"):
                for d in (FORWARD, BACKWARD):
                    try:
                        seg = integrate_rarefaction(model, U, k, d)
                    except (StartDegenerate, RieffError):
                        continue
                    lam = np.asarray(seg.lambdas)
                    if len(lam) < 2:
                        continue
                    n += 1
                    dl = np.diff(lam) if d == FORWARD else -np.diff(lam)
                    bad += int(np.any(dl <= 0))
    return bad, n


def property_hull(effs, rng, per_eff=10):
    bad = n = 0
    for eff in effs:
        lo, hi = eff.interval
        for _ in range(per_eff):
            a, b = rng.uniform(lo, hi, 2)
            n += 1
            bad += int(not speeds_monotone(hull_solution(eff, a, b)))
    return bad, n


def property_jacobian(model, states):
    S = np.asarray(states)
    j = np.array(model.jacobian_components(S[:, 0], S[:, 1]))     # (4, n)
    J = np.stack([np.stack([j[0], j[1]], -1), np.stack([j[2], j[3]], -1)], 1)
    return float(np.max(np.abs(J - _fd_jacobian(model, S[:, 0], S[:, 1]))))


@_timed
def criterion_9(rng_seed=None):
    rng = np.random.default_rng(seed() if rng_seed is None else rng_seed)
    models = [CoreyModel(1.0, 1.0, 1.0), CoreyModel(2.0, 1.0, 0.5)]
    refs = [O, (0.7, 0.0), (0.3, 0.2), (0.5, 0.5)] + random_states(rng, 3)
    rh = property_rh(models, refs)
    rbad, rn = property_rarefaction(models, random_states(rng, 8))
    hbad, hn = property_hull(smoothness_effs(), rng)
    jac = max(property_jacobian(m, random_states(rng, 1000, margin=0.0)) for m in models)
    ok = rh <= 1e-10 and rbad == 0 and hbad == 0 and jac <= 1e-6
    return CriterionResult(9, "property suites", ok,
                           f"RH residual {rh:.1e}; lambda non-monotone {rbad}/{rn}; "
                           f"hull non-monotone {hbad}/{hn}; Jacobian error {jac:.1e}")


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9)


def run_all(echo=print):
    results = []
    for fn in CRITERIA:
        try:
            res = fn()
        except RieffError as exc:
            num = CRITERIA.index(fn) + 1
            res = CriterionResult(num, fn.__name__, False, f"{type(exc).__name__}: {exc}")
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
