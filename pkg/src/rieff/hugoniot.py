"""Rankine-Hugoniot loci by pseudo-arclength continuation.

Branches leave the reference state R along the directions where the scalar
Hugoniot function ``(F(U)-F(R)) x (U-R)`` vanishes on a small circle around R.
For strictly hyperbolic R these are the four eigen-directions; at degenerate
states (the vertex O of the Corey model, where J = 0) the same scan still
finds every local branch entering the triangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .config import DEFAULT_TOL, Tolerances
from .errors import CoincidentStates, NewtonDivergence, StartDegenerate
from .flux_model import (
    FAMILIES,
    State,
    as_state,
    char_fields,
    check_state,
    eigen_at,
    family_index,
    fmt_state,
    in_domain,
    speeds_at,
)

FORWARD, BACKWARD = "forward", "backward"

LAX_TAGS = (
    "slow_shock",
    "fast_shock",
    "overcompressive",
    "undercompressive",
    "characteristic_left",
    "characteristic_right",
)


@dataclass(frozen=True)
class LaxClass:
    tag: str
    family: str | None = None   # family of the (possibly characteristic) Lax pattern

    def __str__(self):
        return self.tag

    @property
    def admissible(self) -> bool:
        return self.tag in ("slow_shock", "fast_shock", "characteristic_left", "characteristic_right")


@dataclass
class HugoniotBranch:
    reference: State
    points: np.ndarray          # (N, 2), points[0] is the reference state
    sigmas: np.ndarray          # sigma(R, U); sigmas[0] is the limit at R
    tangents: np.ndarray        # unit dU/ds
    dsigma: np.ndarray          # d sigma / ds
    arclength: np.ndarray
    start_direction: tuple
    label: str
    family: str | None = None
    stop_reason: str = "max_steps"
    lax_classes: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    def prefix(self, n, extra=None, stop_reason=None) -> "HugoniotBranch":
        """First ``n`` samples, optionally followed by one refined sample.

        ``extra`` is ``(U, sigma, tangent, dsigma, s)``.
        """
        pts, sig = self.points[:n], self.sigmas[:n]
        tan, dsg, arc = self.tangents[:n], self.dsigma[:n], self.arclength[:n]
        lax = list(self.lax_classes[:n])
        if extra is not None:
            U, s_, t, d, s = extra
            pts = np.vstack([pts, [U]])
            sig = np.append(sig, s_)
            tan = np.vstack([tan, [t]])
            dsg = np.append(dsg, d)
            arc = np.append(arc, s)
            lax = []
        return replace(self, points=pts, sigmas=sig, tangents=tan, dsigma=dsg, arclength=arc,
                       stop_reason=stop_reason or self.stop_reason, lax_classes=lax)


@dataclass(frozen=True)
class BetheWendroffPoint:
    state: State
    family: str
    sigma: float
    lam: float
    s: float
    index: int          # sample index preceding the point on the branch
    tangent: tuple
    dsigma: float


def shock_speed(model, R, U, tol: Tolerances = DEFAULT_TOL):
    """Least-squares shock speed between R and U and the RH residual."""
    R = as_state(R)
    U = as_state(U)
    d1, d2 = U.u1 - R.u1, U.u2 - R.u2
    if abs(d1) < 1e-14 and abs(d2) < 1e-14:
        raise CoincidentStates(f"states {fmt_state(R)} and {fmt_state(U)} coincide")
    fr = model.flux(R.u1, R.u2)
    fu = model.flux(U.u1, U.u2)
    e1, e2 = fu[0] - fr[0], fu[1] - fr[1]
    sigma = (e1 * d1 + e2 * d2) / (d1 * d1 + d2 * d2)
    return sigma, math.hypot(e1 - sigma * d1, e2 - sigma * d2)


def _cmp(a, b, eps):
    if a < b - eps:
        return -1
    if a > b + eps:
        return 1
    return 0


def _pattern(checks, eps):
    """Evaluate a list of (lhs, rhs, side) '<' relations.

    Returns None on violation, otherwise the list of sides holding with
    equality.
    """
    eq = []
    for lhs, rhs, side in checks:
        c = _cmp(lhs, rhs, eps)
        if c > 0:
            return None
        if c == 0:
            eq.append(side)
    return eq


def classify_speeds(sigma, left, right, eps=DEFAULT_TOL.eps_eq) -> LaxClass:
    """Lax pattern of a shock from characteristic speeds on both sides.

    ``left`` and ``right`` are ``(lambda_s, lambda_f)`` of the left and right
    states. One of the inequalities may hold with equality.
    """
    lsL, lfL = left
    lsR, lfR = right
    slow = _pattern([(lsR, sigma, "R"), (sigma, lsL, "L"), (sigma, lfR, "R")], eps)
    fast = _pattern([(lfR, sigma, "R"), (sigma, lfL, "L"), (lsL, sigma, "L")], eps)
    for fam, eq in (("s", slow), ("f", fast)):
        if eq is None or len(eq) > 1:
            continue
        if not eq:
            return LaxClass("slow_shock" if fam == "s" else "fast_shock", fam)
    for fam, eq in (("s", slow), ("f", fast)):
        if eq is not None and len(eq) == 1:
            return LaxClass("characteristic_left" if eq[0] == "L" else "characteristic_right", fam)
    if _cmp(lfR, sigma, eps) < 0 and _cmp(sigma, lsL, eps) < 0:
        return LaxClass("overcompressive")
    return LaxClass("undercompressive")


def lax_classify(model, R, U, sigma, orientation=FORWARD, tol: Tolerances = DEFAULT_TOL) -> LaxClass:
    """Classify the shock between reference R and U.

    Forward orientation takes R as the left state, backward as the right.
    """
    R = as_state(R)
    U = as_state(U)
    sR = speeds_at(model, R.u1, R.u2)
    sU = speeds_at(model, U.u1, U.u2)
    if orientation == FORWARD:
        return classify_speeds(sigma, sR, sU, tol.eps_eq)
    if orientation == BACKWARD:
        return classify_speeds(sigma, sU, sR, tol.eps_eq)
    raise ValueError(f"orientation must be 'forward' or 'backward', got {orientation!r}")


def _solve3(a, b):
    """Solve a 3x3 system by Cramer's rule; returns None when singular."""
    (a00, a01, a02), (a10, a11, a12), (a20, a21, a22) = a
    c0 = a11 * a22 - a12 * a21
    c1 = a10 * a22 - a12 * a20
    c2 = a10 * a21 - a11 * a20
    det = a00 * c0 - a01 * c1 + a02 * c2
    scale = max(abs(x) for row in a for x in row)
    if scale == 0 or abs(det) < 1e-300 or abs(det) < 1e-14 * scale ** 3:
        return None
    b0, b1, b2 = b
    x0 = (b0 * c0 - a01 * (b1 * a22 - a12 * b2) + a02 * (b1 * a21 - a11 * b2)) / det
    x1 = (a00 * (b1 * a22 - a12 * b2) - b0 * c1 + a02 * (a10 * b2 - b1 * a20)) / det
    x2 = (a00 * (a11 * b2 - b1 * a21) - a01 * (a10 * b2 - b1 * a20) + b0 * c2) / det
    return x0, x1, x2


class _Tracer:
    """Predictor-corrector machinery for the locus of a fixed reference R."""

    def __init__(self, model, R, tol: Tolerances):
        self.model = model
        self.R = as_state(R)
        self.tol = tol
        self.fR = model.flux(self.R.u1, self.R.u2)

    def residual(self, u1, u2, sigma):
        f1, f2 = self.model.flux(u1, u2)
        return (f1 - self.fR[0] - sigma * (u1 - self.R.u1), f2 - self.fR[1] - sigma * (u2 - self.R.u2))

    def correct(self, up, sp, t, max_iter=20):
        """Newton on the RH equations plus the hyperplane t.(U - up) = 0."""
        u1, u2, s = up[0], up[1], sp
        R1, R2 = self.R
        for it in range(max_iter):
            g1, g2 = self.residual(u1, u2, s)
            g3 = t[0] * (u1 - up[0]) + t[1] * (u2 - up[1])
            j00, j01, j10, j11 = self.model.jacobian_components(u1, u2)
            dx = _solve3(
                ((j00 - s, j01, -(u1 - R1)), (j10, j11 - s, -(u2 - R2)), (t[0], t[1], 0.0)),
                (-g1, -g2, -g3),
            )
            if dx is None:
                return None
            u1 += dx[0]
            u2 += dx[1]
            s += dx[2]
            if not all(math.isfinite(v) for v in (u1, u2, s)):
                return None
            r = max(abs(v) for v in self.residual(u1, u2, s))
            step = max(abs(dx[0]), abs(dx[1]))
            if r <= self.tol.newton_tol and step < 1e-9:
                return (u1, u2), s, it + 1
            if step < 1e-15:
                break
        if max(abs(v) for v in self.residual(u1, u2, s)) <= 10 * self.tol.newton_tol:
            return (u1, u2), s, max_iter
        return None

    def tangent(self, U, s, t_prev):
        j00, j01, j10, j11 = self.model.jacobian_components(U[0], U[1])
        a = (j00 - s, j01, -(U[0] - self.R.u1))
        b = (j10, j11 - s, -(U[1] - self.R.u2))
        n = (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])
        nu = math.hypot(n[0], n[1])
        if nu == 0.0:
            return t_prev, 0.0
        tu = (n[0] / nu, n[1] / nu)
        ds = n[2] / nu
        if tu[0] * t_prev[0] + tu[1] * t_prev[1] < 0:
            tu = (-tu[0], -tu[1])
            ds = -ds
        return tu, ds

    def point_at(self, U, s, t, dsig, h):
        """Corrected locus point a chord length ``h`` ahead of (U, s)."""
        up = (U[0] + h * t[0], U[1] + h * t[1])
        res = self.correct(up, s + h * dsig, t)
        if res is None:
            return None
        V, sv, _ = res
        tv, dv = self.tangent(V, sv, t)
        return V, sv, tv, dv

    def march(self, U0, s0, t0, *, h0, max_steps, max_length, stop=None):
        """Continue the locus from (U0, s0) heading along t0.

        ``stop(i, V, sigma, t, dsig)`` may return a reason string to end the
        march after accepting sample i. Returns per-sample lists and the
        stop reason.
        """
        tol = self.tol
        pts, sig, tans, dsg, arc = [tuple(U0)], [s0], [], [], [0.0]
        t, ds0 = self.tangent(U0, s0, t0)
        tans.append(t)
        dsg.append(ds0)
        h = h0
        reason = "max_steps"
        R = self.R
        for _ in range(max_steps):
            U, s = pts[-1], sig[-1]
            t, d = tans[-1], dsg[-1]
            accepted = None
            while h >= tol.h_min:
                res = self.point_at(U, s, t, d, h)
                if res is not None:
                    V, sv, tv, dv = res
                    cosang = tv[0] * t[0] + tv[1] * t[1]
                    dist = math.hypot(V[0] - U[0], V[1] - U[1])
                    if cosang > math.cos(0.12) and dist < 2 * h:
                        accepted = (V, sv, tv, dv, cosang)
                        break
                h *= 0.5
            if accepted is None:
                raise NewtonDivergence(
                    f"continuation from {fmt_state(R)} stalled near {fmt_state(U)} (step below {tol.h_min})"
                )
            V, sv, tv, dv, cosang = accepted
            if not in_domain(V[0], V[1], tol.eps_dom):
                V, sv, tv, dv, hb = self._to_boundary(U, s, t, d, h)
                if hb > 1e-15:
                    pts.append(V)
                    sig.append(sv)
                    tans.append(tv)
                    dsg.append(dv)
                    arc.append(arc[-1] + math.hypot(V[0] - U[0], V[1] - U[1]))
                reason = "boundary"
                break
            pts.append(V)
            sig.append(sv)
            tans.append(tv)
            dsg.append(dv)
            arc.append(arc[-1] + math.hypot(V[0] - U[0], V[1] - U[1]))
            if stop is not None:
                r = stop(len(pts) - 1, V, sv, tv, dv)
                if r:
                    reason = r
                    break
            if arc[-1] >= max_length:
                reason = "max_length"
                break
            if arc[-1] > 20 * h0 and math.hypot(V[0] - R.u1, V[1] - R.u2) < 0.5 * h:
                reason = "closed"
                break
            if cosang > math.cos(0.03):
                h = min(1.5 * h, tol.h_max)
        return pts, sig, tans, dsg, arc, reason

    def _to_boundary(self, U, s, t, d, h):
        """Bisect the chord length so the last point lands on the boundary."""
        lo, hi = 0.0, h
        best = (U, s, t, d, 0.0)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            res = self.point_at(U, s, t, d, mid)
            if res is not None and in_domain(res[0][0], res[0][1], self.tol.eps_dom):
                lo = mid
                best = (*res, mid)
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        return best


def _circle_roots(model, R, rho, n=720, tol: Tolerances = DEFAULT_TOL):
    """Directions theta where the scalar Hugoniot function vanishes at radius rho."""
    fR = model.flux(R.u1, R.u2)

    def hfun(th):
        c, s = math.cos(th), math.sin(th)
        f1, f2 = model.flux(R.u1 + rho * c, R.u2 + rho * s)
        return ((f1 - fR[0]) * s - (f2 - fR[1]) * c) / rho

    thetas = [2 * math.pi * i / n for i in range(n)]
    inside = [in_domain(R.u1 + rho * math.cos(t), R.u2 + rho * math.sin(t), tol.eps_dom) for t in thetas]
    vals = [hfun(t) if ok else float("nan") for t, ok in zip(thetas, inside)]
    finite = [abs(v) for v in vals if math.isfinite(v)]
    if not finite:
        return []
    zero = 1e-9 * max(max(finite), 1e-300)
    roots = []
    for i in range(n):
        j = (i + 1) % n
        if not inside[i]:
            continue
        if abs(vals[i]) <= zero:
            roots.append((thetas[i], True))
            continue
        if not inside[j] or abs(vals[j]) <= zero:
            continue
        if vals[i] * vals[j] < 0:
            a, b = thetas[i], thetas[i] + 2 * math.pi / n
            roots.append((brentq(hfun, a, b, xtol=1e-15) % (2 * math.pi), False))
    # merge roots closer than two grid spacings, preferring exact zeros
    roots.sort()
    merged = []
    gap = 2.5 * 2 * math.pi / n
    for th, exact in roots:
        if merged:
            d = abs(th - merged[-1][0])
            d = min(d, 2 * math.pi - d)
            if d < gap:
                if exact and not merged[-1][1]:
                    merged[-1] = (th, exact)
                continue
        merged.append((th, exact))
    if len(merged) > 1:
        d = abs(merged[0][0] - merged[-1][0])
        if min(d, 2 * math.pi - d) < gap:
            merged.pop()
    return [th for th, _ in merged]


def _lax_tags(model, R, pts, sigmas, tol):
    sR = speeds_at(model, R.u1, R.u2)
    tags = ["reference"]
    for U, s in zip(pts[1:], sigmas[1:]):
        tags.append(classify_speeds(s, sR, speeds_at(model, U[0], U[1]), tol.eps_eq).tag)
    return tags


def _make_branch(model, R, pts, sig, tans, dsg, arc, reason, label, family, start, tol):
    pts = np.asarray(pts, dtype=float)
    sig = np.asarray(sig, dtype=float)
    return HugoniotBranch(
        reference=R,
        points=pts,
        sigmas=sig,
        tangents=np.asarray(tans, dtype=float),
        dsigma=np.asarray(dsg, dtype=float),
        arclength=np.asarray(arc, dtype=float),
        start_direction=start,
        label=label,
        family=family,
        stop_reason=reason,
        lax_classes=_lax_tags(model, R, pts, sig, tol),
    )


def trace_hugoniot(
    model,
    R,
    *,
    rho=1e-3,
    max_steps=20000,
    max_length=10.0,
    tol: Tolerances = DEFAULT_TOL,
):
    """Trace every local branch of the Hugoniot locus through R.

    Each branch starts at R (sample 0, with sigma set to its limit) and is
    continued until the triangle boundary, ``max_length`` of arclength or
    ``max_steps``. Branches are labelled by their start direction: ``"+s"``,
    ``"-f"`` ... when R is strictly hyperbolic, by angle otherwise.
    """
    R = check_state(R, tol)
    ls, lf, rs, rf, disc = eigen_at(model, R.u1, R.u2)
    hyperbolic = disc >= -tol.eps_hyp and (lf - ls) >= tol.eps_coinc
    roots = _circle_roots(model, R, rho, tol=tol)
    if not roots:
        raise StartDegenerate(f"no Hugoniot branch leaves {fmt_state(R)} into the triangle")
    tr = _Tracer(model, R, tol)
    if hyperbolic:
        cf = char_fields(model, R, tol)
    branches = []
    for th in roots:
        d = (math.cos(th), math.sin(th))
        up = (R.u1 + rho * d[0], R.u2 + rho * d[1])
        s0, _ = shock_speed(model, R, up, tol)
        res = tr.correct(up, s0, d)
        if res is None:
            raise NewtonDivergence(f"could not start Hugoniot branch from {fmt_state(R)} at angle {th:.4f}")
        U0, s0, _ = res
        if not in_domain(U0[0], U0[1], tol.eps_dom):
            continue
        pts, sig, tans, dsg, arc, reason = tr.march(
            U0, s0, d, h0=rho, max_steps=max_steps, max_length=max_length
        )
        family = None
        if hyperbolic:
            a_s = cf.r_s[0] * d[0] + cf.r_s[1] * d[1]
            a_f = cf.r_f[0] * d[0] + cf.r_f[1] * d[1]
            family = "s" if abs(a_s) >= abs(a_f) else "f"
            a = a_s if family == "s" else a_f
            label = ("+" if a >= 0 else "-") + family
            s_R = cf.speed(family)
            ds_R = dsg[0]
        else:
            label = f"theta={math.degrees(th):.2f}"
            slope = (sig[1] - sig[0]) / (arc[1] - arc[0]) if len(sig) > 1 else dsg[0]
            ds_R = slope
            if disc >= -tol.eps_hyp:
                # coincident speeds: every branch leaves with the common speed
                s_R = 0.5 * (ls + lf)
            elif len(sig) > 1:
                s_R = sig[0] - slope * rho
            else:
                s_R = sig[0]
        pts = [tuple(R)] + list(pts)
        sig = [s_R] + list(sig)
        tans = [d] + list(tans)
        dsg = [ds_R] + list(dsg)
        first = math.hypot(U0[0] - R.u1, U0[1] - R.u2)
        arc = [0.0] + [first + a for a in arc]
        branches.append(_make_branch(model, R, pts, sig, tans, dsg, arc, reason, label, family, d, tol))
    return branches


def continue_branch(model, R, U0, heading, *, stop=None, max_steps=20000, max_length=10.0,
                    h0=None, tol: Tolerances = DEFAULT_TOL):
    """Continue the locus of R from a state U0 already on it.

    Used when a rarefaction ends at an inflection that lies on the locus of
    the original reference state.
    """
    R = as_state(R)
    tr = _Tracer(model, R, tol)
    s0, res0 = shock_speed(model, R, U0, tol)
    res = tr.correct(tuple(U0), s0, heading)
    if res is None:
        raise NewtonDivergence(f"state {fmt_state(U0)} could not be corrected onto the locus of {fmt_state(R)}")
    U, s, _ = res
    pts, sig, tans, dsg, arc, reason = tr.march(
        U, s, heading, h0=h0 or tol.h_rar, max_steps=max_steps, max_length=max_length, stop=stop
    )
    return _make_branch(model, R, pts, sig, tans, dsg, arc, reason, "continued", None, tuple(heading), tol)


def _refine(tr, branch, i, fn, target_tol):
    """Root of fn along the branch between samples i and i+1."""
    U = branch.points[i]
    t = branch.tangents[i]
    d = branch.dsigma[i]
    s = branch.sigmas[i]
    hmax = math.hypot(*(branch.points[i + 1] - U))
    cache = {}

    def at(h):
        if h not in cache:
            if h == 0.0:
                cache[h] = (tuple(U), s, tuple(t), d)
            else:
                p = tr.point_at(U, s, t, d, h)
                if p is None:
                    raise NewtonDivergence("corrector failed during refinement")
                cache[h] = p
        return cache[h]

    def g(h):
        return fn(*at(h))

    lo, hi = 0.0, hmax
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return at(lo), 0.0
    if glo * ghi > 0:
        return None
    h = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return at(h), h


def find_bethe_wendroff(model, branch: HugoniotBranch, tol: Tolerances = DEFAULT_TOL, first_only=False):
    """All states on the branch where sigma(R, U) = lambda_k(U), k in {s, f}.

    Sign changes of sigma - lambda_k between samples are refined by root
    finding on the corrected locus. Sample 0 (R itself) is skipped.
    """
    if len(branch) < 2:
        return []
    tr = _Tracer(model, branch.reference, tol)
    lam = np.array([speeds_at(model, p[0], p[1]) for p in branch.points])
    found = []
    for k in FAMILIES:
        idx = family_index(k)
        g = branch.sigmas - lam[:, idx]
        for i in range(1, len(branch) - 1):
            if g[i] == 0.0 or g[i] * g[i + 1] < 0:
                out = _refine(tr, branch, i, lambda V, s, t, d: s - speeds_at(model, V[0], V[1])[idx], tol.bw_tol)
                if out is None:
                    continue
                (V, s, t, d), h = out
                found.append(
                    BetheWendroffPoint(
                        state=State(*V), family=k, sigma=s, lam=speeds_at(model, V[0], V[1])[idx],
                        s=branch.arclength[i] + h, index=i, tangent=tuple(t), dsigma=d,
                    )
                )
    found.sort(key=lambda p: p.s)
    if first_only:
        return found[:1]
    return found


def liu_trim(model, branch: HugoniotBranch, orientation=FORWARD, tol: Tolerances = DEFAULT_TOL) -> HugoniotBranch:
    """Maximal initial arc satisfying Liu's E-condition.

    Forward orientation (R on the left): sigma(R, U) must not exceed sigma at
    any earlier sample, i.e. sigma is non-increasing. Backward: non-decreasing.
    The first violation is refined to the extremum of sigma, which is a
    Bethe-Wendroff point.
    """
    if orientation not in (FORWARD, BACKWARD):
        raise ValueError(f"orientation must be 'forward' or 'backward', got {orientation!r}")
    sgn = 1.0 if orientation == FORWARD else -1.0
    sig = sgn * branch.sigmas
    eps = tol.eps_eq
    best = sig[0]
    viol = None
    for i in range(1, len(sig)):
        if sig[i] > best + eps:
            viol = i
            break
        best = min(best, sig[i])
    if viol is None:
        return branch
    if viol == 1:
        return branch.prefix(1, stop_reason="liu")
    ds = sgn * branch.dsigma
    tr = _Tracer(model, branch.reference, tol)
    for j in range(1, viol):
        if ds[j] <= 0 < ds[j + 1] or ds[j] == 0:
            out = _refine(tr, branch, j, lambda V, s, t, d: sgn * d, tol.bw_tol)
            if out is not None:
                (V, s, t, d), h = out
                return branch.prefix(j + 1, extra=(V, s, t, d, branch.arclength[j] + h), stop_reason="liu")
    return branch.prefix(viol, stop_reason="liu")
