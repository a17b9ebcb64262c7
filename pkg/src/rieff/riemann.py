"""Riemann solutions by the wave curve method.

The slow wave curve from U^L and the fast wave curve into U^R are built as
effective fluxes (one per side of the origin). Their intersection gives the
intermediate state U^M; the waves of each group come from the scalar hull
construction on the group's effective flux, with speeds recomputed from the
system (Rankine-Hugoniot for shocks, characteristic speeds for fans).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .config import DEFAULT_TOL, Tolerances
from .eff import PRESETS, build_eff
from .errors import NoIntersection, NonMonotoneCoordinate, PieceError, RieffError
from .flux_model import FAST, SLOW, State, char_fields, check_state, eigen_at, family_index, fmt_state, speeds_at
from .hugoniot import BACKWARD, FORWARD, shock_speed, trace_hugoniot
from .scalar_hull import hull_solution


@dataclass
class WaveCurve:
    origin: State
    family: str
    orientation: str
    arms: list                  # EffectiveFlux per side of the origin
    notes: list = field(default_factory=list)

    @property
    def samples(self) -> np.ndarray:
        if not self.arms:
            return np.array([tuple(self.origin)])
        return np.vstack([a.points for a in self.arms])

    def group_to(self, arm_index, ell):
        """Scalar wave group from the origin to Gamma(l) on one arm."""
        arm = self.arms[arm_index]
        if self.orientation == FORWARD:
            return hull_solution(arm, arm.ell_reference, ell)
        return hull_solution(arm, ell, arm.ell_reference)


@dataclass
class Wave:
    kind: str                   # "shock" or "rarefaction"
    family: str
    left: State
    right: State
    speed_left: float
    speed_right: float
    ell_left: float
    ell_right: float
    hull_speeds: tuple          # (left, right) speeds of the scalar hull wave
    eff: object = None

    def as_dict(self):
        return {
            "kind": self.kind,
            "family": self.family,
            "left": list(self.left),
            "right": list(self.right),
            "speed_left": self.speed_left,
            "speed_right": self.speed_right,
        }


@dataclass
class RiemannSolution:
    UL: State
    UM: State
    UR: State
    slow_group: list
    fast_group: list
    valid: bool
    unique: bool = True
    candidates: list = field(default_factory=list)
    slow_eff: object = None
    fast_eff: object = None

    @property
    def waves(self):
        return list(self.slow_group) + list(self.fast_group)

    def as_dict(self):
        return {
            "UL": list(self.UL),
            "UM": list(self.UM),
            "UR": list(self.UR),
            "valid": self.valid,
            "unique": self.unique,
            "candidates": [list(c) for c in self.candidates],
            "slow_group": [w.as_dict() for w in self.slow_group],
            "fast_group": [w.as_dict() for w in self.fast_group],
        }


def _coord_order(t):
    """Presets ordered by how fast they change along direction t."""
    items = list(PRESETS.values())
    return sorted(items, key=lambda c: -abs(c.rate(t)))


def _build_arm(model, U0, family, orientation, side, heading, notes, tol, **kw):
    last = None
    for coord in _coord_order(heading):
        try:
            return build_eff(model, U0, family, orientation, coord, side=side, strict=False, tol=tol, **kw)
        except NonMonotoneCoordinate as exc:
            last = exc
        except PieceError as exc:
            if isinstance(exc.cause, NonMonotoneCoordinate):
                last = exc
            else:
                notes.append(f"{side} arm from {fmt_state(U0)}: {exc}")
                return None
    notes.append(f"{side} arm from {fmt_state(U0)}: no monotone coordinate ({last})")
    return None


def wave_curve(model, U0, family, orientation=FORWARD, *, tol: Tolerances = DEFAULT_TOL) -> WaveCurve:
    """Wave curve of ``family`` through U0 (forward: U0 is the left state).

    One arm per side of U0. At a state with coincident speeds every local
    Hugoniot branch is tried as a shock-first arm and kept when its first
    Bethe-Wendroff point belongs to ``family``.
    """
    U0 = check_state(U0, tol)
    notes = []
    arms = []
    ls, lf, rs, rf, disc = eigen_at(model, U0.u1, U0.u2)
    if lf - ls < tol.eps_coinc:
        branches = trace_hugoniot(model, U0, tol=tol.with_overrides(h_max=2e-3))
        for br in branches:
            arm = _build_arm(model, U0, family, orientation, "shock", br.start_direction, notes, tol,
                             direction=br.start_direction, hugoniot_branches=branches)
            if arm is None or len(arm.points) < 2:
                continue
            fams = [b.family_after for b in arm.breakpoints if b.tag == "bethe_wendroff"]
            if fams and fams[0] != family:
                continue
            if not fams and arm.pieces and arm.pieces[0].family not in (None, family):
                continue
            arms.append(arm)
    else:
        cf = char_fields(model, U0, tol)
        r = cf.vector(family)
        rar = r if orientation == FORWARD else (-r[0], -r[1])
        for side, heading in (("rarefaction", rar), ("shock", (-rar[0], -rar[1]))):
            arm = _build_arm(model, U0, family, orientation, side, heading, notes, tol)
            if arm is not None and len(arm.points) >= 2:
                arms.append(arm)
    return WaveCurve(U0, family, orientation, arms, notes)


def _project_on(arm, U, tol=1e-8):
    """Parameter of U on the arm polyline when within ``tol`` of it."""
    P = arm.base.points
    if len(P) < 2:
        return None
    A, B = P[:-1], P[1:]
    d = B - A
    L2 = np.einsum("ij,ij->i", d, d)
    L2[L2 == 0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", np.asarray(U) - A, d) / L2, 0.0, 1.0)
    X = A + t[:, None] * d
    dist = np.hypot(X[:, 0] - U[0], X[:, 1] - U[1])
    i = int(np.argmin(dist))
    if dist[i] > tol:
        return None
    return arm.coord.project(U)


def _segment_crossings(P, Q):
    """Index pairs (i, j) where segment P[i]P[i+1] crosses Q[j]Q[j+1]."""
    a, b = P[:-1, None, :], P[1:, None, :]
    c, d = Q[None, :-1, :], Q[None, 1:, :]

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    hit = (o1 * o2 <= 0) & (o3 * o4 <= 0)
    # bounding boxes exclude collinear non-overlapping segments
    hit &= (np.minimum(a[..., 0], b[..., 0]) <= np.maximum(c[..., 0], d[..., 0]) + 1e-15)
    hit &= (np.minimum(c[..., 0], d[..., 0]) <= np.maximum(a[..., 0], b[..., 0]) + 1e-15)
    hit &= (np.minimum(a[..., 1], b[..., 1]) <= np.maximum(c[..., 1], d[..., 1]) + 1e-15)
    hit &= (np.minimum(c[..., 1], d[..., 1]) <= np.maximum(a[..., 1], b[..., 1]) + 1e-15)
    return np.argwhere(hit)


def _refine_crossing(A, B, la, lb, tol=1e-12):
    """Newton on Gamma_A(la) = Gamma_B(lb)."""
    ia, ib = A.interval, B.interval
    for _ in range(50):
        ga, gb = np.array(A.state_at(la)), np.array(B.state_at(lb))
        r = ga - gb
        if np.max(np.abs(r)) < tol:
            return la, lb, State(float(ga[0]), float(ga[1]))
        J = np.column_stack([A.state_derivative(la), -B.state_derivative(lb)])
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if abs(det) < 1e-14:
            return None
        dla = (-r[0] * J[1, 1] + r[1] * J[0, 1]) / det
        dlb = (-J[0, 0] * r[1] + J[1, 0] * r[0]) / det
        la = min(max(la + dla, ia[0]), ia[1])
        lb = min(max(lb + dlb, ib[0]), ib[1])
    return None


def _intersections(A, B):
    P, Q = A.base.points, B.base.points
    if len(P) < 2 or len(Q) < 2:
        return []
    out = []
    lP, lQ = A.base.ell_values, B.base.ell_values
    for i, j in _segment_crossings(P, Q):
        res = _refine_crossing(A, B, 0.5 * (lP[i] + lP[i + 1]), 0.5 * (lQ[j] + lQ[j + 1]))
        if res is not None:
            out.append(res)
    return out


def _end_family(eff, ell_end, ell_other, default):
    """Family of the piece adjacent to ell_end on the side of ell_other."""
    ev = eff.base.ell_values
    lo, hi = min(ell_end, ell_other), max(ell_end, ell_other)
    inside = np.nonzero((ev > lo) & (ev < hi))[0]
    if len(inside) == 0 or not eff.pieces:
        return eff.piece_family_at(0.5 * (lo + hi)) or default
    j = inside[np.argmin(np.abs(ev[inside] - ell_end))]
    return eff.pieces[eff.base.piece_index[j]].family or default


def _refine_junction(model, eff, ell0, anchor, fan_side, family):
    """Move a fan/shock junction to where sigma(Gamma(l), anchor) = lambda_k(Gamma(l)).

    The hull places the junction with the accuracy of the interpolated
    derivative; this solves the system condition on the base curve instead.
    ``fan_side`` is a parameter value inside the fan, used for the family.
    """
    k = family_index(_end_family(eff, ell0, fan_side, family))
    lo_b, hi_b = eff.interval

    def g(ell):
        U = eff.state_at(ell)
        return shock_speed(model, U, anchor)[0] - speeds_at(model, U.u1, U.u2)[k]

    try:
        g0 = g(ell0)
    except RieffError:
        return ell0
    for w in (1e-8, 1e-7, 1e-6, 1e-5):
        a, b = max(ell0 - w, lo_b), min(ell0 + w, hi_b)
        try:
            ga, gb = g(a), g(b)
        except RieffError:
            return ell0
        if ga * gb < 0:
            x = brentq(g, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            return x if abs(g(x)) < abs(g0) else ell0
    return ell0


def _to_waves(model, eff, hull, U_left, U_right, family):
    """System waves from a scalar hull solution on a group's flux."""
    n = len(hull)
    # parameter values at the wave boundaries; the group ends are exact states
    ells = [hull[0].ell_left] + [w.ell_right for w in hull]
    states = [U_left] + [eff.state_at(l) for l in ells[1:-1]] + [U_right]
    for i in range(1, n):
        a, b = hull[i - 1], hull[i]
        if a.kind == "rarefaction" and b.kind == "shock":
            ells[i] = _refine_junction(model, eff, ells[i], states[i + 1], a.ell_left, family)
        elif a.kind == "shock" and b.kind == "rarefaction":
            ells[i] = _refine_junction(model, eff, ells[i], states[i - 1], b.ell_right, family)
        else:
            continue
        states[i] = eff.state_at(ells[i])
    waves = []
    for i, w in enumerate(hull):
        left, right = states[i], states[i + 1]
        el, er = ells[i], ells[i + 1]
        fam = eff.piece_family_at(0.5 * (el + er)) or family
        if w.kind == "shock":
            s, _ = shock_speed(model, left, right)
            sl = sr = s
        else:
            kl = _end_family(eff, el, er, family)
            kr = _end_family(eff, er, el, family)
            sl = speeds_at(model, left[0], left[1])[family_index(kl)]
            sr = speeds_at(model, right[0], right[1])[family_index(kr)]
        left, right = State(float(left[0]), float(left[1])), State(float(right[0]), float(right[1]))
        waves.append(Wave(w.kind, fam, left, right, float(sl), float(sr),
                          float(el), float(er), (w.speed_left, w.speed_right), eff))
    return waves


def _ordered(waves, eps):
    sp = []
    for w in waves:
        sp.extend([w.speed_left, w.speed_right])
    return all(b >= a - eps for a, b in zip(sp[:-1], sp[1:]))


def solve_riemann(model, UL, UR, *, tol: Tolerances = DEFAULT_TOL) -> RiemannSolution:
    """Slow group, intermediate state and fast group joining UL to UR.

    Candidates for U^M are UR on the slow curve of UL, UL on the fast curve
    of UR and crossings of the two curves. Several distinct candidates are
    all reported; the one with least total variation is used and
    ``unique`` is set to False. Raises NoIntersection when there is none.
    """
    UL = check_state(UL, tol)
    UR = check_state(UR, tol)
    if math.hypot(UL.u1 - UR.u1, UL.u2 - UR.u2) < 1e-14:
        return RiemannSolution(UL, UL, UR, [], [], True)
    slow = wave_curve(model, UL, SLOW, FORWARD, tol=tol)
    fast = wave_curve(model, UR, FAST, BACKWARD, tol=tol)

    cands = []  # (UM, slow arm, l on slow arm, fast arm, l on fast arm)
    for a in slow.arms:
        la = _project_on(a, UR)
        if la is not None:
            cands.append((UR, a, la, None, None))
    for b in fast.arms:
        lb = _project_on(b, UL)
        if lb is not None:
            cands.append((UL, None, None, b, lb))
    for a in slow.arms:
        for b in fast.arms:
            for la, lb, X in _intersections(a, b):
                cands.append((X, a, la, b, lb))
    if not cands:
        raise NoIntersection(
            f"slow curve of {fmt_state(UL)} and fast curve of {fmt_state(UR)} do not meet inside the triangle"
        )
    distinct = []
    for c in cands:
        if all(math.hypot(c[0][0] - d[0][0], c[0][1] - d[0][1]) > 1e-7 for d in distinct):
            distinct.append(c)

    def tv(c):
        X = c[0]
        return (abs(UL.u1 - X[0]) + abs(UL.u2 - X[1]) + abs(1 - UL.u1 - UL.u2 - (1 - X[0] - X[1]))
                + abs(UR.u1 - X[0]) + abs(UR.u2 - X[1]) + abs(1 - UR.u1 - UR.u2 - (1 - X[0] - X[1])))

    distinct.sort(key=tv)
    UM, a, la, b, lb = distinct[0]
    UM = State(float(UM[0]), float(UM[1]))
    eps = 1e-8
    slow_group, fast_group = [], []
    if a is not None and math.hypot(UM.u1 - UL.u1, UM.u2 - UL.u2) > 1e-12:
        hull = hull_solution(a, a.ell_reference, la)
        slow_group = _to_waves(model, a, hull, UL, UM, SLOW)
    if b is not None and math.hypot(UM.u1 - UR.u1, UM.u2 - UR.u2) > 1e-12:
        hull = hull_solution(b, lb, b.ell_reference)
        fast_group = _to_waves(model, b, hull, UM, UR, FAST)
    valid = _ordered(slow_group, eps) and _ordered(fast_group, eps)
    if slow_group and fast_group:
        valid = valid and slow_group[-1].speed_right <= fast_group[0].speed_left + eps
    return RiemannSolution(
        UL, UM, UR, slow_group, fast_group, valid,
        unique=len(distinct) == 1,
        candidates=[State(float(c[0][0]), float(c[0][1])) for c in distinct],
        slow_eff=a, fast_eff=b,
    )


def _invert_fan(model, w, xi):
    eff = w.eff

    def g(ell):
        U = eff.state_at(ell)
        k = _end_family(eff, ell, 0.5 * (w.ell_left + w.ell_right), w.family)
        return speeds_at(model, U.u1, U.u2)[family_index(k)] - xi

    a, b = w.ell_left, w.ell_right
    ga, gb = g(a), g(b)
    if ga * gb > 0:
        # interpolation noise at the fan edges: pick the closer end
        return eff.state_at(a) if abs(ga) < abs(gb) else eff.state_at(b)
    ell = brentq(g, min(a, b), max(a, b), xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return eff.state_at(ell)


def sample_profile(sol: RiemannSolution, xi_values, model=None):
    """States U(xi) of the self-similar solution; left limits at shocks."""
    if model is None:
        eff = sol.slow_eff or sol.fast_eff
        model = eff.model if eff is not None else None
    out = []
    waves = sol.waves
    for xi in np.atleast_1d(np.asarray(xi_values, dtype=float)):
        U = sol.UL
        for w in waves:
            if w.kind == "shock":
                if xi <= w.speed_left:
                    break
                U = w.right
            else:
                if xi <= w.speed_left:
                    U = w.left
                    break
                if xi < w.speed_right:
                    U = _invert_fan(model, w, xi)
                    break
                U = w.right
        out.append(State(float(U[0]), float(U[1])))
    return out
