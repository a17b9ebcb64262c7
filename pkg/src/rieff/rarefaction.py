"""Rarefaction curves: integral curves of the unit eigenvector fields."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import HyperbolicityLoss, NotAnInflectionStop, StartDegenerate, TransitionError
from .flux_model import FAST, SLOW, State, _lam_fd, check_state, eigen_at, family_index, family_name, fmt_state, in_domain

FORWARD, BACKWARD = "forward", "backward"
STOP_REASONS = ("inflection", "boundary", "hyperbolicity_loss", "coincidence", "max_length")


@dataclass
class RarefactionSegment:
    family: str
    direction: str              # forward: lambda increases along the points
    points: np.ndarray          # (N, 2)
    lambdas: np.ndarray
    nonlinearity: np.ndarray    # grad(lambda).r with r along the direction of travel
    tangents: np.ndarray        # unit direction of travel
    arclength: np.ndarray
    stop_reason: str
    start_at_inflection: bool = False
    step: float = DEFAULT_TOL.h_rar

    def __len__(self):
        return len(self.points)

    @property
    def end(self) -> State:
        return State(*self.points[-1])


class _Field:
    """Unit eigenvector field of one family, oriented by continuity."""

    def __init__(self, model, k, tol):
        self.model = model
        self.idx = family_index(k)
        self.tol = tol

    def __call__(self, u1, u2, prev):
        ls, lf, rs, rf, disc = eigen_at(self.model, u1, u2)
        if disc < -self.tol.eps_hyp:
            raise HyperbolicityLoss(f"complex characteristic speeds at ({u1}, {u2})")
        if lf - ls < self.tol.eps_coinc:
            return prev
        r = (rs, rf)[self.idx]
        if r[0] * prev[0] + r[1] * prev[1] < 0:
            r = (-r[0], -r[1])
        return r

    def aligned_family(self, u1, u2, d):
        """Index of the family whose eigenvector is closest to direction d."""
        ls, lf, rs, rf, disc = eigen_at(self.model, u1, u2)
        if lf - ls < self.tol.eps_coinc:
            return self.idx
        a_s = abs(rs[0] * d[0] + rs[1] * d[1])
        a_f = abs(rf[0] * d[0] + rf[1] * d[1])
        return 0 if a_s > a_f else 1


def _rk4(field, U, d, h):
    k1 = field(U[0], U[1], d)
    k2 = field(U[0] + 0.5 * h * k1[0], U[1] + 0.5 * h * k1[1], k1)
    k3 = field(U[0] + 0.5 * h * k2[0], U[1] + 0.5 * h * k2[1], k2)
    k4 = field(U[0] + h * k3[0], U[1] + h * k3[1], k3)
    return (
        U[0] + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        U[1] + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
    )


def _near_singular(model, U, rel=0.05):
    ls, lf, _, _, _ = eigen_at(model, U[0], U[1])
    return lf - ls < rel * (abs(ls) + abs(lf))


def _controlled_step(field, U, d, hc, tol=1e-10, hmin=1e-7):
    """RK4 step with step doubling.

    The step only shrinks near singular points of the direction field
    (umbilic and degenerate points). Returns ``(V, h, ok)``; ``ok`` is False
    when the error stays above ``tol`` at the smallest step.
    """
    while True:
        V1 = _rk4(field, U, d, hc)
        M = _rk4(field, U, d, 0.5 * hc)
        dm = field(M[0], M[1], d)
        V2 = _rk4(field, M, dm, 0.5 * hc)
        err = max(abs(V1[0] - V2[0]), abs(V1[1] - V2[1]))
        if err <= tol:
            return V2, hc, True
        if hc <= hmin:
            return V2, hc, False
        hc *= 0.5


def _boundary_fraction(U, V, eps):
    """Largest t in [0, 1] with U + t (V - U) inside the triangle."""
    t = 1.0
    for g0, g1 in ((U[0], V[0]), (U[1], V[1]), (1.0 - U[0] - U[1], 1.0 - V[0] - V[1])):
        if g1 < -eps and g0 > g1:
            t = min(t, max(0.0, g0 / (g0 - g1)))
    return t


def _past(U, heading, delta):
    return (U[0] + delta * heading[0], U[1] + delta * heading[1])


def _bisect_step(f, lo, hi, flo, iters=60, ftol=0.0):
    """Bisection on a step length; f(h) returns a signed scalar, f(lo) = flo."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if ftol and abs(fm) <= ftol:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    return 0.5 * (lo + hi)


def integrate_rarefaction(
    model,
    U0,
    family,
    direction=FORWARD,
    *,
    heading=None,
    h=None,
    max_length=10.0,
    tol: Tolerances = DEFAULT_TOL,
) -> RarefactionSegment:
    """Integrate the k-rarefaction curve from U0 with fixed-step RK4.

    Without ``heading`` the eigenvector sign is chosen so that lambda_k
    increases (forward) or decreases (backward). With ``heading`` the curve
    continues along it and ``direction`` is inferred from how lambda_k
    changes. Integration stops at an inflection (refined so that
    ``|grad(lambda).r| <= 1e-9``), the triangle boundary, loss of
    hyperbolicity, a crossing of the coincidence locus, or ``max_length``.

    A start on the inflection locus without ``heading`` returns a zero-length
    segment with ``start_at_inflection`` set.
    """
    U0 = check_state(U0, tol)
    k = family_name(family)
    idx = family_index(k)
    h = tol.h_rar if h is None else h
    field = _Field(model, k, tol)
    ls, lf, rs, rf, disc = eigen_at(model, U0.u1, U0.u2)
    if disc < -tol.eps_hyp:
        raise HyperbolicityLoss(f"complex characteristic speeds at {fmt_state(U0)}")
    near = lf - ls < tol.eps_coinc
    if near:
        if heading is None:
            raise StartDegenerate(f"characteristic speeds coincide at {fmt_state(U0)}; a heading is required")
        n = math.hypot(*heading)
        r = (heading[0] / n, heading[1] / n)
    else:
        r = (rs, rf)[idx]
        if heading is not None and r[0] * heading[0] + r[1] * heading[1] < 0:
            r = (-r[0], -r[1])
    nl = _lam_fd(model, U0.u1, U0.u2, r, k, tol)
    lam0 = (ls, lf)[idx]
    if heading is None:
        if abs(nl) < tol.eps_nl:
            return RarefactionSegment(
                k, direction, np.array([tuple(U0)]), np.array([lam0]), np.array([nl]), np.array([r]),
                np.array([0.0]), "inflection", start_at_inflection=True, step=h,
            )
        if (nl > 0) != (direction == FORWARD):
            r = (-r[0], -r[1])
            nl = -nl
    else:
        direction = FORWARD if nl >= 0 else BACKWARD
    sgn = 1.0 if direction == FORWARD else -1.0

    pts, lams, nls, tans, arc = [tuple(U0)], [lam0], [nl], [r], [0.0]
    reason = "max_length"
    d = r
    U = tuple(U0)
    n_steps = int(math.ceil(max_length / h))

    def nl_at(V, dv):
        rv = field(V[0], V[1], dv)
        return sgn * _lam_fd(model, V[0], V[1], rv, k, tol), rv

    hc = h
    while arc[-1] < max_length and len(pts) <= 4 * n_steps:
        try:
            if hc < h or _near_singular(model, U):
                V, hc, ok = _controlled_step(field, U, d, hc)
            else:
                V, ok = _rk4(field, U, d, hc), True
            eV = eigen_at(model, V[0], V[1])
            if eV[4] < -tol.eps_hyp:
                raise HyperbolicityLoss
        except HyperbolicityLoss:
            reason = "hyperbolicity_loss"
            break
        if not ok:
            # Direction field singular here: the speeds are about to coincide.
            reason = "coincidence" if eV[1] - eV[0] < 1e-2 * (abs(eV[0]) + abs(eV[1])) else "hyperbolicity_loss"
            break
        dv = (V[0] - U[0], V[1] - U[1])
        nv = math.hypot(*dv)
        dv = (dv[0] / nv, dv[1] / nv)

        if not in_domain(V[0], V[1], tol.eps_dom):
            # The field outside the triangle is meaningless, so shorten the
            # step until it stays inside, then backtrack linearly onto the edge.
            lo, hi = 0.0, hc
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if in_domain(*_rk4(field, U, d, mid), tol.eps_dom):
                    lo = mid
                else:
                    hi = mid
            W = _rk4(field, U, d, lo) if lo > 0 else U
            ext = (W[0] + hc * d[0], W[1] + hc * d[1])
            t = _boundary_fraction(W, ext, 0.0)
            W2 = (W[0] + t * hc * d[0], W[1] + t * hc * d[1])
            if math.hypot(W2[0] - W[0], W2[1] - W[1]) < 1e-6:
                W = W2
            ds_ = math.hypot(W[0] - U[0], W[1] - U[1])
            if ds_ > 1e-12:
                pts.append(W)
                lams.append(eigen_at(model, W[0], W[1])[idx])
                nls.append(sgn * _lam_fd(model, W[0], W[1], field(W[0], W[1], d), k, tol))
                tans.append(d)
                arc.append(arc[-1] + ds_)
            reason = "boundary"
            break

        if field.aligned_family(V[0], V[1], dv) != idx:
            # Crossed the coincidence locus: the direction of travel now belongs
            # to the other family. Stop at the crossing.
            def swap(hh):
                W = _rk4(field, U, d, hh)
                return 1.0 if field.aligned_family(W[0], W[1], d) == idx else -1.0

            hs = _bisect_step(swap, 0.0, hc, 1.0)
            W = _rk4(field, U, d, hs)
            eW = eigen_at(model, W[0], W[1])
            gap = eW[1] - eW[0]
            if hs > 0:
                pts.append(W)
                lams.append(eW[idx])
                nls.append(float("nan"))
                tans.append(d)
                arc.append(arc[-1] + hs)
            reason = "coincidence" if gap < 1e-6 * (1 + abs(eW[1])) else "hyperbolicity_loss"
            break

        nlv, rv = nl_at(V, dv)
        lamv = eV[idx]
        if nlv <= tol.eps_nl or sgn * (lamv - lams[-1]) <= 0:
            nl_prev = nls[-1] if math.isfinite(nls[-1]) else 1.0

            def g(hh):
                W = _rk4(field, U, d, hh)
                return nl_at(W, d)[0]

            hs = _bisect_step(g, 0.0, hc, nl_prev, ftol=tol.eps_nl)
            W = _rk4(field, U, d, hs)
            pts.append(W)
            lams.append(eigen_at(model, W[0], W[1])[idx])
            nls.append(g(hs))
            tans.append(field(W[0], W[1], d))
            arc.append(arc[-1] + hs)
            reason = "inflection"
            eW = eigen_at(model, W[0], W[1])
            if eW[1] - eW[0] < 1e-6 * (1 + abs(eW[1])):
                # speed maximum at a point of coincidence, not a true inflection
                reason = "coincidence"
            break

        pts.append(V)
        lams.append(lamv)
        nls.append(nlv)
        tans.append(rv)
        arc.append(arc[-1] + hc)
        U, d = V, rv
        hc = min(h, 2.0 * hc)

    return RarefactionSegment(
        family=k,
        direction=direction,
        points=np.asarray(pts, dtype=float),
        lambdas=np.asarray(lams, dtype=float),
        nonlinearity=np.asarray(nls, dtype=float),
        tangents=np.asarray(tans, dtype=float),
        arclength=np.asarray(arc, dtype=float),
        stop_reason=reason,
        step=h,
    )


def cross_coincidence(model, U, heading, family, *, max_length=10.0, tol: Tolerances = DEFAULT_TOL):
    """Continue a rarefaction of ``family`` through a point of coincident speeds.

    Eigenvectors are ill-defined at U itself, so integration restarts a short
    distance along ``heading``, where the family's eigenvector lines up with
    it; U is prepended to the returned segment.
    """
    idx = family_index(family)
    for delta in (1e-6, 1e-5, 1e-4, 1e-3):
        V = _past(U, heading, delta)
        if not in_domain(V[0], V[1], tol.eps_dom):
            break
        ls, lf, rs, rf, disc = eigen_at(model, V[0], V[1])
        r = (rs, rf)[idx]
        if lf - ls >= tol.eps_coinc and abs(r[0] * heading[0] + r[1] * heading[1]) > 0.99:
            seg = integrate_rarefaction(model, V, family, heading=heading, max_length=max_length, tol=tol)
            seg.points = np.vstack([[tuple(U)], seg.points])
            # speed at U: the one whose eigenvector runs along the heading
            eU = eigen_at(model, U[0], U[1])
            j = _Field(model, family, tol).aligned_family(U[0], U[1], heading)
            seg.lambdas = np.concatenate([[eU[j]], seg.lambdas])
            seg.nonlinearity = np.concatenate([[np.nan], seg.nonlinearity])
            seg.tangents = np.vstack([[tuple(heading)], seg.tangents])
            seg.arclength = np.concatenate([[0.0], seg.arclength + delta])
            return seg
    raise TransitionError(f"no {family_name(family)}-family direction continues through {fmt_state(U)}")


def find_inflection(model, segment: RarefactionSegment, tol: Tolerances = DEFAULT_TOL) -> State:
    """Inflection state at the end of a segment stopped by an inflection."""
    if segment.stop_reason != "inflection":
        raise NotAnInflectionStop(f"segment stopped by {segment.stop_reason!r}, not by an inflection")
    if segment.start_at_inflection or len(segment) < 2:
        return State(*segment.points[-1])
    U = segment.points[-2]
    d = segment.tangents[-2]
    field = _Field(model, segment.family, tol)
    sgn = 1.0 if segment.direction == FORWARD else -1.0
    k = segment.family
    hlast = segment.arclength[-1] - segment.arclength[-2]

    def g(hh):
        W = _rk4(field, U, d, hh)
        return sgn * _lam_fd(model, W[0], W[1], field(W[0], W[1], d), k, tol)

    if abs(segment.nonlinearity[-1]) <= tol.eps_nl:
        return State(*segment.points[-1])
    hi = max(hlast, segment.step)
    hs = _bisect_step(g, 0.0, hi, g(0.0), ftol=tol.eps_nl)
    return State(*_rk4(field, U, d, hs))
