"""Effective flux functions: scalar fluxes lifted over a wave group.

A base curve Gamma(l) runs from a reference state R through shock pieces
(arcs of the Hugoniot locus of R) and rarefaction pieces (integral curves).
On shock pieces f(l) = phi(R) + sigma(R, Gamma(l)) (l - l_R); on rarefaction
pieces f is continued by integrating lambda_k dl. Either way f(l) equals the
flux combination phi(Gamma(l)), which :func:`lifting_identity_error` checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .config import DEFAULT_TOL, Tolerances
from .errors import (
    NonMonotoneCoordinate,
    ParameterError,
    PieceError,
    RieffError,
    StartDegenerate,
    TransitionError,
)
from .flux_model import (
    FAST,
    SLOW,
    State,
    as_state,
    char_fields,
    check_state,
    eigen_at,
    family_index,
    family_name,
    fmt_state,
    nonlinearity,
    speeds_at,
)
from .hugoniot import BACKWARD, FORWARD, continue_branch, find_bethe_wendroff, liu_trim, shock_speed, trace_hugoniot
from .rarefaction import cross_coincidence, integrate_rarefaction


@dataclass(frozen=True)
class ParamCoordinate:
    """Affine coordinate l(U) = alpha0 + alpha1 u1 + alpha2 u2."""

    alpha0: float
    alpha1: float
    alpha2: float

    def __post_init__(self):
        if self.alpha1 == 0 and self.alpha2 == 0:
            raise ParameterError("coordinate weights (alpha1, alpha2) must not both vanish")

    def project(self, U):
        return self.alpha0 + self.alpha1 * U[0] + self.alpha2 * U[1]

    def combine(self, F):
        """Same affine weights applied to a flux pair or triple."""
        return self.alpha0 + self.alpha1 * F[0] + self.alpha2 * F[1]

    def rate(self, t):
        return self.alpha1 * t[0] + self.alpha2 * t[1]


U1 = ParamCoordinate(0.0, 1.0, 0.0)
U2 = ParamCoordinate(0.0, 0.0, 1.0)
U3 = ParamCoordinate(1.0, -1.0, -1.0)
PRESETS = {"u1": U1, "u2": U2, "u3": U3}


def as_coord(spec) -> ParamCoordinate:
    if isinstance(spec, ParamCoordinate):
        return spec
    if isinstance(spec, str):
        try:
            return PRESETS[spec]
        except KeyError:
            raise ParameterError(f"unknown coordinate preset {spec!r}") from None
    a0, a1, a2 = spec
    return ParamCoordinate(float(a0), float(a1), float(a2))


def project_coord(coord, U) -> float:
    return as_coord(coord).project(U)


def flux_combination(coord, F) -> float:
    return as_coord(coord).combine(F)


# ---------------------------------------------------------------------------
# pieces and base curves


@dataclass
class EffPiece:
    kind: str                   # "shock" or "rarefaction"
    family: str | None
    ell: np.ndarray
    f: np.ndarray
    fprime: np.ndarray
    points: np.ndarray
    tangents: np.ndarray        # unit dU/ds along the direction of travel
    source: object
    quad_error: float = 0.0

    def __len__(self):
        return len(self.ell)


@dataclass
class BaseCurve:
    reference: State
    pieces: list
    coord: ParamCoordinate
    ell_values: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    piece_index: np.ndarray

    @property
    def interval(self):
        return float(self.ell_values.min()), float(self.ell_values.max())


def _piece_arrays(coord, piece):
    """(points, tangents) of a piece given as EffPiece, (kind, source) or source."""
    if isinstance(piece, EffPiece):
        return piece.points, piece.tangents
    if isinstance(piece, tuple):
        piece = piece[1]
    return np.asarray(piece.points, dtype=float), np.asarray(piece.tangents, dtype=float)


def make_base_curve(R, pieces, coord=U1, *, join_tol=1e-8) -> BaseCurve:
    """Concatenate pieces into a base curve and check l is strictly monotone.

    Shared endpoints of consecutive pieces are kept once. Raises
    NonMonotoneCoordinate at the first sample where l turns back.
    """
    R = as_state(R)
    coord = as_coord(coord)
    pts, tans, idx = [], [], []
    for i, piece in enumerate(pieces):
        p, t = _piece_arrays(coord, piece)
        if len(p) == 0:
            continue
        if pts:
            gap = math.hypot(*(p[0] - pts[-1]))
            if gap > join_tol:
                raise PieceError(i, f"piece starts {gap:.3e} away from the end of the previous one")
            p, t = p[1:], t[1:]
        pts.extend(p)
        tans.extend(t)
        idx.extend([i] * len(p))
    if not pts:
        pts, tans, idx = [tuple(R)], [(1.0, 0.0)], [0]
    pts = np.asarray(pts, dtype=float)
    ell = coord.alpha0 + coord.alpha1 * pts[:, 0] + coord.alpha2 * pts[:, 1]
    d = np.diff(ell)
    if len(d):
        sgn = np.sign(d[np.argmax(np.abs(d))])
        bad = np.nonzero(sgn * d <= 0)[0]
        if len(bad):
            j = int(bad[0]) + 1
            raise NonMonotoneCoordinate(
                f"coordinate is not monotone along the base curve at sample {j} "
                f"(state {fmt_state(pts[j])}); choose another coordinate",
                index=j,
            )
    return BaseCurve(R, list(pieces), coord, ell, pts, np.asarray(tans, dtype=float), np.asarray(idx))


# ---------------------------------------------------------------------------
# liftings


def lift_shock(model, R, branch, coord=U1) -> EffPiece:
    """Shock lifting of a (Liu-trimmed) Hugoniot arc of R.

    f(l) = phi(R) + sigma(R, Gamma(l)) (l - l_R); the derivative follows from
    the branch tangent and d sigma / ds.
    """
    R = as_state(R)
    coord = as_coord(coord)
    pts = np.asarray(branch.points, dtype=float)
    sig = np.asarray(branch.sigmas, dtype=float)
    tans = np.asarray(branch.tangents, dtype=float)
    ellR = coord.project(R)
    phiR = coord.combine(model.flux(R.u1, R.u2))
    ell = coord.alpha0 + coord.alpha1 * pts[:, 0] + coord.alpha2 * pts[:, 1]
    dl = ell - ellR
    f = phiR + sig * dl
    rate = coord.alpha1 * tans[:, 0] + coord.alpha2 * tans[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        fp = sig + np.where(dl == 0.0, 0.0, np.asarray(branch.dsigma) / rate * dl)
    at_R = np.hypot(pts[:, 0] - R.u1, pts[:, 1] - R.u2) == 0.0
    f[at_R] = phiR
    return EffPiece("shock", branch.family, ell, f, fp, pts, tans, branch)


def _quadrature(s, y):
    """Cumulative integral of y over arclength s by cubic-spline quadrature,
    with a Richardson-style estimate from the rule on every other sample.

    Samples are not uniform (step control near singular points, short final
    steps), which rules out composite Simpson on raw samples.
    """
    if len(s) < 4:
        F = np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(s))])
        return F, 0.0
    F = CubicSpline(s, y).antiderivative()(s)
    F -= F[0]
    sub = np.unique(np.concatenate([np.arange(0, len(s), 2), [len(s) - 1]]))
    if len(sub) < 4:
        return F, 0.0
    coarse = CubicSpline(s[sub], y[sub]).antiderivative()
    return F, abs(F[-1] - (coarse(s[-1]) - coarse(s[0]))) / 15.0


def lift_rarefaction(model, segment, coord=U1, f_start=None, *, tol: Tolerances = DEFAULT_TOL) -> EffPiece:
    """Rarefaction lifting: f' = lambda_k and f integrated from ``f_start``.

    Cubic-spline quadrature over arclength; when the Richardson estimate exceeds
    ``tol.quad_tol`` the segment is re-integrated with half the step.
    """
    coord = as_coord(coord)
    pts = np.asarray(segment.points, dtype=float)
    if f_start is None:
        f_start = coord.combine(model.flux(pts[0, 0], pts[0, 1]))
    for _ in range(4):
        pts = np.asarray(segment.points, dtype=float)
        ell = coord.alpha0 + coord.alpha1 * pts[:, 0] + coord.alpha2 * pts[:, 1]
        lam = np.asarray(segment.lambdas, dtype=float)
        tans = np.asarray(segment.tangents, dtype=float)
        # f' = lambda in l; integrate lambda dl/ds over arclength, which is
        # increasing whichever way l runs
        F, err = _quadrature(np.asarray(segment.arclength), lam * coord.rate(tans.T))
        if err <= tol.quad_tol or len(pts) < 3:
            break
        segment = integrate_rarefaction(
            model, pts[0], segment.family, segment.direction, heading=tuple(segment.tangents[0]),
            h=0.5 * segment.step, max_length=segment.arclength[-1] * (1 + 1e-12), tol=tol,
        )
    return EffPiece("rarefaction", segment.family, ell, f_start + F, lam, pts,
                    np.asarray(segment.tangents, dtype=float), segment, quad_error=err)


# ---------------------------------------------------------------------------
# sampled scalar flux


class SampledFlux:
    """Scalar flux known at samples (l, f, f'), C1 Hermite interpolation."""

    def __init__(self, ell, f, fprime):
        ell = np.asarray(ell, dtype=float)
        f = np.asarray(f, dtype=float)
        fprime = np.asarray(fprime, dtype=float)
        order = np.argsort(ell, kind="stable")
        ell, f, fprime = ell[order], f[order], fprime[order]
        keep = np.concatenate([[True], np.diff(ell) > 1e-14])
        self.ell_sorted = ell[keep]
        self.f_sorted = f[keep]
        self.fprime_sorted = fprime[keep]
        if len(self.ell_sorted) >= 2:
            self._spline = CubicHermiteSpline(self.ell_sorted, self.f_sorted, self.fprime_sorted)
            self._dspline = self._spline.derivative()
        else:
            self._spline = None

    @property
    def interval(self):
        return float(self.ell_sorted[0]), float(self.ell_sorted[-1])

    def __call__(self, ell):
        if self._spline is None:
            return np.full_like(np.asarray(ell, dtype=float), self.f_sorted[0])
        return self._spline(ell)

    def derivative(self, ell):
        if self._spline is None:
            return np.full_like(np.asarray(ell, dtype=float), self.fprime_sorted[0])
        return self._dspline(ell)

    @classmethod
    def from_function(cls, f, fprime, a, b, n=2001):
        x = np.linspace(a, b, n)
        return cls(x, f(x), fprime(x))


@dataclass
class Breakpoint:
    ell: float
    state: State
    tag: str                    # "bethe_wendroff", "inflection" or "coincidence"
    family_before: str | None
    family_after: str | None
    jump_f: float
    jump_fprime: float


class EffectiveFlux(SampledFlux):
    """Composite effective flux over a base curve from a reference state."""

    def __init__(self, model, reference, family, orientation, coord, pieces, breakpoints, base, stop_reason):
        self.model = model
        self.reference = reference
        self.family = family
        self.orientation = orientation
        self.coord = coord
        self.pieces = pieces
        self.breakpoints = breakpoints
        self.base = base
        self.stop_reason = stop_reason
        ell, f, fp, kinds = [], [], [], []
        for i, p in enumerate(pieces):
            s = 1 if i and len(ell) else 0
            ell.extend(p.ell[s:])
            f.extend(p.f[s:])
            fp.extend(p.fprime[s:])
            kinds.extend([p.kind] * (len(p) - s))
        if not ell:
            R = reference
            ell = [coord.project(R)]
            f = [coord.combine(model.flux(R.u1, R.u2))]
            fp = [0.0]
            kinds = ["point"]
        self.ell = np.asarray(ell)
        self.f = np.asarray(f)
        self.fprime = np.asarray(fp)
        self.kinds = kinds
        self.points = base.points
        super().__init__(self.ell, self.f, self.fprime)
        self._state_spline = None

    @property
    def ell_reference(self):
        return self.coord.project(self.reference)

    @property
    def end_state(self) -> State:
        return State(*self.points[-1])

    def _build_state_spline(self):
        ell = self.base.ell_values
        pts = self.base.points
        order = np.argsort(ell)
        x = ell[order]
        y = pts[order]
        rate = self.coord.alpha1 * self.base.tangents[order, 0] + self.coord.alpha2 * self.base.tangents[order, 1]
        keep = np.concatenate([[True], np.diff(x) > 1e-14])
        x, y, rate = x[keep], y[keep], rate[keep]
        t = self.base.tangents[order][keep]
        if np.all(np.abs(rate) > 1e-8):
            dy = t / rate[:, None]
        else:
            dy = np.gradient(y, x, axis=0)
        self._state_spline = CubicHermiteSpline(x, y, dy, axis=0)

    def state_at(self, ell) -> State:
        """Gamma(l) by Hermite interpolation of the base curve."""
        if len(self.ell_sorted) < 2:
            return State(*self.points[0])
        if self._state_spline is None:
            self._build_state_spline()
        u = self._state_spline(float(ell))
        return State(float(u[0]), float(u[1]))

    def state_derivative(self, ell):
        """dGamma/dl of the interpolated base curve."""
        if self._state_spline is None:
            self._build_state_spline()
        return self._state_spline.derivative()(float(ell))

    def kind_at(self, ell):
        i = int(np.argmin(np.abs(self.ell - ell)))
        return self.kinds[i]

    def piece_family_at(self, ell):
        """Family of the piece containing l (nearest sample)."""
        j = int(np.argmin(np.abs(self.base.ell_values - ell)))
        p = self.pieces[self.base.piece_index[j]] if self.pieces else None
        return p.family if p is not None else self.family

    def summary(self):
        return {
            "reference": list(self.reference),
            "family": self.family,
            "orientation": self.orientation,
            "interval": list(self.interval),
            "stop_reason": self.stop_reason,
            "pieces": [{"kind": p.kind, "family": p.family, "samples": len(p)} for p in self.pieces],
            "breakpoints": [
                {"ell": b.ell, "state": list(b.state), "tag": b.tag, "family_before": b.family_before,
                 "family_after": b.family_after, "jump_f": b.jump_f, "jump_fprime": b.jump_fprime}
                for b in self.breakpoints
            ],
        }


# ---------------------------------------------------------------------------
# composite construction


def _pick_branch(branches, heading):
    best, score = None, -2.0
    for b in branches:
        d = b.start_direction
        c = d[0] * heading[0] + d[1] * heading[1]
        if c > score:
            best, score = b, c
    return best, score


def _shock_heading(model, R, k, orientation, tol):
    """Direction leaving R into the shock side of family k."""
    cf = char_fields(model, R, tol)
    r = cf.vector(k)
    # lambda_k increases along +r: a forward shock lowers it, a backward one raises it
    return (-r[0], -r[1]) if orientation == FORWARD else r


def _cut_at_bw(model, branch, tol):
    """Cut a Liu-trimmed arc at its first Bethe-Wendroff point.

    Returns (arc, bw_family) with bw_family None when the arc ends without one.
    """
    end_s = branch.arclength[-1]
    for bw in find_bethe_wendroff(model, branch, tol):
        if bw.s < end_s - 1e-12 and bw.s > 0:
            arc = branch.prefix(bw.index + 1, extra=(tuple(bw.state), bw.sigma, bw.tangent, bw.dsigma, bw.s),
                                stop_reason="bethe_wendroff")
            return arc, bw.family
    if branch.stop_reason == "liu" and len(branch) > 1:
        U = branch.points[-1]
        ls, lf = speeds_at(model, U[0], U[1])
        s = branch.sigmas[-1]
        k = SLOW if abs(s - ls) <= abs(s - lf) else FAST
        gap = min(abs(s - ls), abs(s - lf))
        if gap > 1e-8 * (1 + abs(s)):
            raise TransitionError(
                f"Liu-admissible arc ends at {fmt_state(U)} where sigma differs from both speeds by {gap:.3e}"
            )
        return branch, k
    return branch, None


def build_eff(
    model,
    R,
    family,
    orientation=FORWARD,
    coord=U1,
    *,
    side="shock",
    direction=None,
    max_length=10.0,
    max_pieces=16,
    strict=True,
    hugoniot_branches=None,
    shock_h_max=2e-3,
    tol: Tolerances = DEFAULT_TOL,
) -> EffectiveFlux:
    """Effective flux of the wave group of ``family`` leaving R on one side.

    ``side`` selects the first wave: "shock" follows the Hugoniot locus of R
    (Liu-trimmed, up to the first Bethe-Wendroff point, then a rarefaction of
    the matched family), "rarefaction" integrates from R (after an inflection
    the construction resumes on the locus of R). ``direction`` picks the
    branch or heading explicitly and is required when the speeds coincide at
    R. With ``strict=False`` an unresolved transition ends the construction
    instead of raising. Shock pieces are traced with steps of at most
    ``shock_h_max`` so that the interpolated flux resolves tangencies.
    """
    R = check_state(R, tol)
    k = family_name(family)
    coord = as_coord(coord)
    if orientation not in (FORWARD, BACKWARD):
        raise ParameterError(f"orientation must be 'forward' or 'backward', got {orientation!r}")
    if side not in ("shock", "rarefaction"):
        raise ParameterError(f"side must be 'shock' or 'rarefaction', got {side!r}")
    ls, lf, rs, rf, disc = eigen_at(model, R.u1, R.u2)
    degenerate = lf - ls < tol.eps_coinc
    if degenerate and direction is None:
        raise StartDegenerate(f"characteristic speeds coincide at {fmt_state(R)}; pass a direction")
    rar_dir = FORWARD if orientation == FORWARD else BACKWARD
    phiR = coord.combine(model.flux(R.u1, R.u2))

    pieces, bps = [], []
    stop_reason = "boundary"
    index = 0

    def fail(exc):
        if isinstance(exc, PieceError):
            raise exc
        raise PieceError(index, exc) from exc

    mode = side
    heading = None
    pending = None
    U = R
    if side == "shock":
        try:
            if direction is not None:
                heading = direction
            else:
                heading = _shock_heading(model, R, k, orientation, tol)
            if not degenerate and abs(nonlinearity(model, R, k, direction=heading, tol=tol)) < tol.eps_nl:
                # on the inflection locus both sides start as rarefactions
                mode = "rarefaction"
        except RieffError as exc:
            fail(exc)

    while index < max_pieces:
        try:
            if mode == "shock" and index == 0:
                branches = hugoniot_branches if hugoniot_branches is not None else trace_hugoniot(
                    model, R, max_length=max_length, tol=tol.with_overrides(h_max=shock_h_max))
                branch, score = _pick_branch(branches, heading)
                if branch is None or score < 0.9:
                    stop_reason = "no_branch"
                    break
                arc = liu_trim(model, branch, orientation, tol)
                if len(arc) < 2:
                    stop_reason = "liu"
                    break
                arc, k_new = _cut_at_bw(model, arc, tol)
                piece = lift_shock(model, R, arc, coord)
                piece.family = k_new or (None if degenerate else k)
                pieces.append(piece)
                if k_new is None:
                    stop_reason = arc.stop_reason
                    break
                U = State(*arc.points[-1])
                heading = tuple(arc.tangents[-1])
                fp_end = piece.fprime[-1]
                pending = Breakpoint(piece.ell[-1], U, "bethe_wendroff", piece.family, k_new, 0.0,
                                     float(fp_end - speeds_at(model, U.u1, U.u2)[family_index(k_new)]))
                bps.append(pending)
                k = k_new
                mode = "rarefaction"
            elif mode == "rarefaction":
                if index == 0 and heading is None:
                    seg = integrate_rarefaction(model, R, k, rar_dir, max_length=max_length, tol=tol)
                elif bps and bps[-1].tag == "coincidence" and pending is not None:
                    seg = cross_coincidence(model, U, heading, k, max_length=max_length, tol=tol)
                else:
                    seg = integrate_rarefaction(model, U, k, rar_dir, heading=heading, max_length=max_length, tol=tol)
                f_start = pieces[-1].f[-1] if pieces else phiR
                piece = lift_rarefaction(model, seg, coord, f_start, tol=tol)
                if pending is not None:
                    pending.jump_f = float(pieces[-1].f[-1] - piece.f[0])
                    pending.jump_fprime = float(pieces[-1].fprime[-1] - piece.fprime[0])
                    pending = None
                pieces.append(piece)
                seg = piece.source
                U = seg.end
                heading = tuple(seg.tangents[-1])
                if seg.stop_reason == "coincidence":
                    k_new = FAST if k == SLOW else SLOW
                    pending = Breakpoint(piece.ell[-1], U, "coincidence", k, k_new, 0.0, 0.0)
                    bps.append(pending)
                    k = k_new
                elif seg.stop_reason == "inflection" and len(seg) > 1:
                    sig, res = shock_speed(model, R, U, tol)
                    if res > 1e-8:
                        raise TransitionError(
                            f"inflection state {fmt_state(U)} is not on the Hugoniot locus of {fmt_state(R)} "
                            f"(residual {res:.3e})"
                        )
                    bps.append(Breakpoint(piece.ell[-1], U, "inflection", k, k, 0.0, 0.0))
                    mode = "continued"
                else:
                    stop_reason = seg.stop_reason
                    break
            else:  # continued shock on the locus of R after an inflection
                br = continue_branch(model, R, U, heading, max_length=max_length,
                                     tol=tol.with_overrides(h_max=shock_h_max))
                piece = lift_shock(model, R, br, coord)
                piece.family = k
                bp = bps[-1]
                bp.jump_f = float(pieces[-1].f[-1] - piece.f[0])
                bp.jump_fprime = float(pieces[-1].fprime[-1] - piece.fprime[0])
                pieces.append(piece)
                stop_reason = br.stop_reason
                break
        except TransitionError as exc:
            if strict:
                fail(exc)
            stop_reason = f"transition: {exc}"
            if bps and bps[-1].tag == "inflection":
                bps.pop()
            break
        except RieffError as exc:
            fail(exc)
        index += 1
    else:
        stop_reason = "max_pieces"

    base = make_base_curve(R, pieces, coord)
    return EffectiveFlux(model, R, family_name(family), orientation, coord, pieces, bps, base, stop_reason)


def lifting_identity_error(model, eff: EffectiveFlux, kind=None) -> float:
    """max |f(l) - phi(Gamma(l))| over samples, optionally for one piece kind."""
    err = 0.0
    for p in eff.pieces:
        if kind is not None and p.kind != kind:
            continue
        f1, f2 = model.flux(p.points[:, 0], p.points[:, 1])
        phi = eff.coord.alpha0 + eff.coord.alpha1 * f1 + eff.coord.alpha2 * f2
        if len(phi):
            err = max(err, float(np.max(np.abs(p.f - phi))))
    return err
