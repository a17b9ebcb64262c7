"""Scalar Riemann solutions on a sampled flux: convex hulls and Welge points."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NoTangency, ParameterError


@dataclass(frozen=True)
class ScalarWave:
    kind: str               # "shock" or "rarefaction"
    ell_left: float
    ell_right: float
    speed_left: float
    speed_right: float

    def as_dict(self):
        return {
            "kind": self.kind,
            "ell_left": self.ell_left,
            "ell_right": self.ell_right,
            "speed_left": self.speed_left,
            "speed_right": self.speed_right,
        }


def _tangency(flux, ellR, fR):
    def T(x):
        return float(flux.derivative(x)) * (x - ellR) - (float(flux(x)) - fR)

    return T


def welge_point(flux, ellR, search=None, tol=1e-12):
    """Tangency point of a chord from (ellR, f(ellR)) to the flux.

    Root of T(l) = f'(l)(l - ellR) - (f(l) - f(ellR)) on ``search``
    (default: the flux interval), taking the root nearest to ``ellR``.
    Raises NoTangency when T keeps one sign.
    """
    lo, hi = flux.interval if search is None else (min(search), max(search))
    ellR = float(ellR)
    fR = float(flux(ellR))
    T = _tangency(flux, ellR, fR)
    grid = flux.ell_sorted[(flux.ell_sorted >= lo) & (flux.ell_sorted <= hi)]
    grid = np.unique(np.concatenate([[lo, hi], grid]))
    # T vanishes to second order at ellR itself: skip its immediate neighbours
    span = hi - lo
    grid = grid[np.abs(grid - ellR) > 1e-6 * max(span, 1e-300)]
    if len(grid) < 2:
        raise NoTangency("search interval too short")
    order = np.argsort(np.abs(grid - ellR))
    grid = grid[order]
    vals = flux.derivative(grid) * (grid - ellR) - (flux(grid) - fR)
    scale = max(1.0, float(np.max(np.abs(vals))))
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        if (a - ellR) * (b - ellR) < 0:
            continue    # neighbours on opposite sides of ellR
        if abs(vals[i]) <= tol * 1e-3 * scale and i > 0:
            return float(a)
        if vals[i] * vals[i + 1] < 0:
            x = brentq(T, min(a, b), max(a, b), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            return float(x)
    raise NoTangency(f"no chord from l = {ellR} is tangent to the flux on [{lo}, {hi}]")


def _hull(x, y, lower):
    """Monotone-chain hull of points sorted by x (collinear points dropped)."""
    sgn = 1.0 if lower else -1.0
    h = []
    for i in range(len(x)):
        while len(h) >= 2:
            j, k = h[-2], h[-1]
            cross = (x[k] - x[j]) * (y[i] - y[j]) - (y[k] - y[j]) * (x[i] - x[j])
            if sgn * cross <= 0:
                h.pop()
            else:
                break
        h.append(i)
    return h


def _polish(flux, a, b, fixed_a, fixed_b, grid):
    """Refine the chord (a, b): free ends move to tangency with the flux."""
    for _ in range(30):
        moved = 0.0
        if not fixed_b:
            nb = _refine_end(flux, a, b, grid)
            moved = max(moved, abs(nb - b))
            b = nb
        if not fixed_a:
            na = _refine_end(flux, b, a, grid)
            moved = max(moved, abs(na - a))
            a = na
        if moved < 1e-15 or (fixed_a or fixed_b):
            break
    return a, b


def _refine_end(flux, anchor, x0, grid):
    fA = float(flux(anchor))
    T = _tangency(flux, anchor, fA)
    i = int(np.searchsorted(grid, x0))
    # T has a double root at the anchor: keep the bracket well clear of it
    gap = 0.25 * abs(x0 - anchor)
    for w in (2, 4, 8, 16):
        lo = grid[max(i - w, 0)]
        hi = grid[min(i + w, len(grid) - 1)]
        if anchor < x0:
            lo = max(lo, anchor + gap)
        else:
            hi = min(hi, anchor - gap)
        if lo < hi and T(lo) * T(hi) < 0:
            return float(brentq(T, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
    return float(x0)


def hull_solution(flux, ellL, ellR, *, chord_tol=1e-10):
    """Oleinik construction of the scalar Riemann solution from ellL to ellR.

    Lower convex hull of f on [ellL, ellR] when ellL < ellR, upper concave
    hull otherwise. Hull contacts become rarefactions, chords become shocks;
    chord ends touching the flux are polished to exact tangency. Waves are
    listed left to right in x, i.e. from ellL towards ellR.
    """
    ellL, ellR = float(ellL), float(ellR)
    if ellL == ellR:
        return []
    lower = ellL < ellR
    a, b = min(ellL, ellR), max(ellL, ellR)
    g = flux.ell_sorted
    inner = g[(g > a) & (g < b)]
    x = np.concatenate([[a], inner, [b]])
    # drop near duplicates of the end points
    keep = np.concatenate([[True], np.diff(x) > 1e-13])
    keep[-1] = True
    x = x[keep]
    if len(x) > 2 and x[-1] - x[-2] <= 1e-13:
        x = np.delete(x, -2)
    y = np.asarray(flux(x), dtype=float)
    h = _hull(x, y, lower)

    # classify hull edges: an edge skipping samples that lie off the chord is a shock
    segs = []
    for j, k in zip(h[:-1], h[1:]):
        shock = False
        if k > j + 1:
            xs, ys = x[j:k + 1], y[j:k + 1]
            chord = y[j] + (y[k] - y[j]) / (x[k] - x[j]) * (xs - x[j])
            shock = float(np.max(np.abs(ys - chord))) > chord_tol
        kind = "shock" if shock else "rarefaction"
        if segs and segs[-1][0] == kind == "rarefaction":
            segs[-1][2] = x[k]
        else:
            segs.append([kind, x[j], x[k]])

    # polish tangencies where a shock meets a rarefaction
    for i, (kind, lo_, hi_) in enumerate(segs):
        if kind != "shock":
            continue
        fixed_lo = i == 0 or segs[i - 1][0] == "shock"
        fixed_hi = i == len(segs) - 1 or segs[i + 1][0] == "shock"
        if fixed_lo and fixed_hi:
            continue
        nlo, nhi = _polish(flux, lo_, hi_, fixed_lo, fixed_hi, x)
        segs[i][1], segs[i][2] = nlo, nhi
        if not fixed_lo:
            segs[i - 1][2] = nlo
        if not fixed_hi:
            segs[i + 1][1] = nhi
    segs = [s for s in segs if s[2] - s[1] > 0]

    waves = []
    for kind, lo_, hi_ in segs:
        if kind == "shock":
            s = (float(flux(hi_)) - float(flux(lo_))) / (hi_ - lo_)
            w = (lo_, hi_) if lower else (hi_, lo_)
            waves.append(ScalarWave("shock", w[0], w[1], s, s))
        else:
            w = (lo_, hi_) if lower else (hi_, lo_)
            waves.append(ScalarWave("rarefaction", w[0], w[1],
                                    float(flux.derivative(w[0])), float(flux.derivative(w[1]))))
    if not lower:
        waves.reverse()
    return waves


def speeds_monotone(waves, eps=1e-9) -> bool:
    sp = []
    for w in waves:
        sp.extend([w.speed_left, w.speed_right])
    return all(b >= a - eps for a, b in zip(sp[:-1], sp[1:]))


def corey_welge_closed_form(A, B, C):
    """Welge points of the three Corey base curves through the oil vertex,
    in the coordinate l = u3 with the reference at l = 1."""
    for name, v in (("A", A), ("B", B), ("C", C)):
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ParameterError(f"Corey coefficient {name} must be positive, got {v!r}")
    D = A + B
    l1 = 1.0 - math.sqrt(C / (A + C))
    l2 = 1.0 - math.sqrt(C / (B + C))
    l3 = 1.0 - math.sqrt(C * D / (A * B + C * D))
    assert l3 < min(l1, l2)
    return l1, l2, l3
