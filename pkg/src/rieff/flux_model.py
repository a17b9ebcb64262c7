"""Flux models, Jacobians and characteristic fields.

Pointwise kernels work on plain floats: every curve construction calls them
thousands of times and 2x2 numpy arrays would dominate the run time. The same
kernels accept numpy arrays where only arithmetic is involved (flux and
Jacobian), which the finite-volume checker relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import DomainError, HyperbolicityLoss, ParameterError

SLOW, FAST = "s", "f"
FAMILIES = (SLOW, FAST)


class State(NamedTuple):
    u1: float
    u2: float

    @property
    def u3(self) -> float:
        return 1.0 - self.u1 - self.u2


def as_state(U) -> State:
    return State(float(U[0]), float(U[1]))


def fmt_state(U) -> str:
    """Short printable form of a state for error messages."""
    return "(" + ", ".join(f"{float(v):.10g}" for v in tuple(U)[:2]) + ")"


def family_index(k) -> int:
    if k in (SLOW, "slow", 0):
        return 0
    if k in (FAST, "fast", 1):
        return 1
    raise ValueError(f"unknown family {k!r}")


def family_name(k) -> str:
    return FAMILIES[family_index(k)]


def in_domain(u1, u2, eps=DEFAULT_TOL.eps_dom) -> bool:
    return u1 >= -eps and u2 >= -eps and u1 + u2 <= 1.0 + eps


def check_state(U, tol: Tolerances = DEFAULT_TOL) -> State:
    U = as_state(U)
    if not (math.isfinite(U.u1) and math.isfinite(U.u2)) or not in_domain(U.u1, U.u2, tol.eps_dom):
        raise DomainError(f"state {fmt_state(U)} is outside the saturation triangle")
    return U


class FluxModel:
    """Flux F(U) = (f1, f2) of a 2x2 system; f3 = 1 - f1 - f2 is implied.

    Subclasses implement :meth:`flux`. The default Jacobian uses central
    differences, so user-supplied models work without further code.
    """

    fd_step = 1e-6

    def flux(self, u1, u2):
        raise NotImplementedError

    def jacobian_components(self, u1, u2):
        h = self.fd_step
        a1, a2 = self.flux(u1 + h, u2)
        b1, b2 = self.flux(u1 - h, u2)
        c1, c2 = self.flux(u1, u2 + h)
        d1, d2 = self.flux(u1, u2 - h)
        return ((a1 - b1) / (2 * h), (c1 - d1) / (2 * h), (a2 - b2) / (2 * h), (c2 - d2) / (2 * h))


@dataclass(frozen=True)
class CoreyModel(FluxModel):
    """Quadratic Corey three-phase flux with mobility coefficients A, B, C."""

    A: float = 1.0
    B: float = 1.0
    C: float = 1.0

    def __post_init__(self):
        for name in ("A", "B", "C"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ParameterError(f"Corey coefficient {name} must be positive, got {v!r}")

    def flux(self, u1, u2):
        u3 = 1.0 - u1 - u2
        a = self.A * u1 * u1
        b = self.B * u2 * u2
        q = a + b + self.C * u3 * u3
        return a / q, b / q

    def jacobian_components(self, u1, u2):
        A, B, C = self.A, self.B, self.C
        u3 = 1.0 - u1 - u2
        q = A * u1 * u1 + B * u2 * u2 + C * u3 * u3
        q1 = 2.0 * (A * u1 - C * u3)
        q2 = 2.0 * (B * u2 - C * u3)
        qq = q * q
        a = A * u1 * u1
        b = B * u2 * u2
        return (
            (2.0 * A * u1 * q - a * q1) / qq,
            -a * q2 / qq,
            -b * q1 / qq,
            (2.0 * B * u2 * q - b * q2) / qq,
        )


def eval_flux(model: FluxModel, U, tol: Tolerances = DEFAULT_TOL):
    """Return the flux triple (f1, f2, f3) at U."""
    U = check_state(U, tol)
    f1, f2 = model.flux(U.u1, U.u2)
    return f1, f2, 1.0 - f1 - f2


def jacobian(model: FluxModel, U, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    U = check_state(U, tol)
    j = model.jacobian_components(U.u1, U.u2)
    return np.array([[j[0], j[1]], [j[2], j[3]]])


def _unit(x, y):
    n = math.hypot(x, y)
    return (x / n, y / n) if n > 0 else (1.0, 0.0)


def _canonical(v):
    x, y = v
    if x < 0 or (x == 0 and y < 0):
        return (-x, -y)
    return v


def _eigvec(j00, j01, j10, j11, lam, other):
    v1 = (j01, lam - j00)
    v2 = (lam - j11, j10)
    n1 = v1[0] * v1[0] + v1[1] * v1[1]
    n2 = v2[0] * v2[0] + v2[1] * v2[1]
    if n1 == 0.0 and n2 == 0.0:
        # J is a multiple of the identity: any direction works.
        return other
    return _unit(*(v1 if n1 >= n2 else v2))


def eig2(j00, j01, j10, j11):
    """Eigen-decomposition of a real 2x2 matrix.

    Returns ``(lam_s, lam_f, r_s, r_f, disc)`` with unit eigenvectors in a
    canonical orientation (non-negative first component). ``disc`` is
    ``(tr J)^2 - 4 det J`` evaluated as ``(j00 - j11)^2 + 4 j01 j10``. Complex
    pairs are reported through a negative ``disc`` and real parts only.
    """
    d = j00 - j11
    disc = d * d + 4.0 * j01 * j10
    tr = j00 + j11
    sq = math.sqrt(disc) if disc > 0 else 0.0
    ls = 0.5 * (tr - sq)
    lf = 0.5 * (tr + sq)
    rf = _eigvec(j00, j01, j10, j11, lf, (1.0, 0.0))
    rs = _eigvec(j00, j01, j10, j11, ls, (-rf[1], rf[0]))
    return ls, lf, _canonical(rs), _canonical(rf), disc


def eigen_at(model: FluxModel, u1, u2):
    return eig2(*model.jacobian_components(u1, u2))


def speeds_at(model: FluxModel, u1, u2):
    j00, j01, j10, j11 = model.jacobian_components(u1, u2)
    d = j00 - j11
    disc = d * d + 4.0 * j01 * j10
    tr = j00 + j11
    sq = math.sqrt(disc) if disc > 0 else 0.0
    return 0.5 * (tr - sq), 0.5 * (tr + sq)


@dataclass(frozen=True)
class CharField:
    lambda_s: float
    lambda_f: float
    r_s: tuple
    r_f: tuple
    discriminant: float
    near_coincident: bool

    def speed(self, k) -> float:
        return (self.lambda_s, self.lambda_f)[family_index(k)]

    def vector(self, k) -> tuple:
        return (self.r_s, self.r_f)[family_index(k)]


def _lam_fd(model, u1, u2, r, k, tol):
    """Directional derivative of lambda_k along r by finite differences.

    Central stencil when both neighbours are admissible, otherwise a
    second-order one-sided stencil pointing into the triangle.
    """
    h = tol.h_nl
    idx = family_index(k)
    eps = tol.eps_dom
    fwd = in_domain(u1 + h * r[0], u2 + h * r[1], eps)
    bwd = in_domain(u1 - h * r[0], u2 - h * r[1], eps)

    def lam(t):
        return speeds_at(model, u1 + t * r[0], u2 + t * r[1])[idx]

    if (fwd and bwd) or (not fwd and not bwd):
        return (lam(h) - lam(-h)) / (2.0 * h)
    if fwd:
        return (-3.0 * lam(0.0) + 4.0 * lam(h) - lam(2.0 * h)) / (2.0 * h)
    return (3.0 * lam(0.0) - 4.0 * lam(-h) + lam(-2.0 * h)) / (2.0 * h)


def char_fields(model: FluxModel, U, tol: Tolerances = DEFAULT_TOL) -> CharField:
    """Characteristic speeds and unit eigenvectors at U.

    Eigenvectors are oriented so that lambda_k increases along +r_k; where
    the directional derivative is within ``eps_nl`` of zero the canonical
    orientation is kept.
    """
    U = check_state(U, tol)
    ls, lf, rs, rf, disc = eigen_at(model, U.u1, U.u2)
    if disc < -tol.eps_hyp:
        raise HyperbolicityLoss(f"complex characteristic speeds at {fmt_state(U)} (discriminant {disc:.3e})")
    near = (lf - ls) < tol.eps_coinc
    oriented = []
    for k, r in ((SLOW, rs), (FAST, rf)):
        if not near and _lam_fd(model, U.u1, U.u2, r, k, tol) < -tol.eps_nl:
            r = (-r[0], -r[1])
        oriented.append(r)
    return CharField(ls, lf, oriented[0], oriented[1], disc, near)


def nonlinearity(model: FluxModel, U, k, direction=None, tol: Tolerances = DEFAULT_TOL) -> float:
    """grad(lambda_k) . r_k at U.

    The sign depends on the orientation of r_k. With ``direction`` given,
    r_k is taken with non-negative projection on it; otherwise the canonical
    orientation (non-negative first component) is used, which keeps the sign
    meaningful along a curve so that inflections show up as sign changes.
    """
    U = check_state(U, tol)
    ls, lf, rs, rf, disc = eigen_at(model, U.u1, U.u2)
    if disc < -tol.eps_hyp:
        raise HyperbolicityLoss(f"complex characteristic speeds at {fmt_state(U)}")
    r = (rs, rf)[family_index(k)]
    if direction is not None and r[0] * direction[0] + r[1] * direction[1] < 0:
        r = (-r[0], -r[1])
    return _lam_fd(model, U.u1, U.u2, r, k, tol)
