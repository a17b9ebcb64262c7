"""First-order finite-volume simulator used to cross-check Riemann solutions.

Local Lax-Friedrichs flux, explicit Euler, outflow boundaries. States that
leave the saturation triangle are projected back and counted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import CFLViolation, ParameterError
from .flux_model import State, check_state

X_EXTENT = 1.5


@dataclass
class Grid1D:
    N: int
    x_extent: float
    cfl: float
    x: np.ndarray           # cell centres
    u1: np.ndarray
    u2: np.ndarray
    t: float = 0.0
    steps: int = 0
    clamp_events: int = 0

    @property
    def dx(self) -> float:
        return 2.0 * self.x_extent / self.N

    @property
    def cells(self):
        return [State(float(a), float(b)) for a, b in zip(self.u1, self.u2)]

    @property
    def u3(self) -> np.ndarray:
        return 1.0 - self.u1 - self.u2

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("x,u1,u2,u3\n")
            for row in zip(self.x, self.u1, self.u2, self.u3):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def riemann_grid(UL, UR, N, *, x_extent=X_EXTENT, cfl=0.5) -> Grid1D:
    if N < 16:
        raise ParameterError(f"N must be at least 16, got {N}")
    if not (0.0 < cfl <= 0.5):
        raise ParameterError(f"cfl must lie in (0, 0.5], got {cfl}")
    dx = 2.0 * x_extent / N
    x = -x_extent + dx * (np.arange(N) + 0.5)
    left = x < 0
    u1 = np.where(left, UL[0], UR[0]).astype(float)
    u2 = np.where(left, UL[1], UR[1]).astype(float)
    return Grid1D(N, x_extent, cfl, x, u1, u2)


def max_speed(model, u1, u2, tol: Tolerances = DEFAULT_TOL):
    """Largest |lambda| per cell (vectorised); complex pairs raise CFLViolation."""
    j00, j01, j10, j11 = model.jacobian_components(u1, u2)
    d = j00 - j11
    disc = d * d + 4.0 * j01 * j10
    if np.any(disc < -tol.eps_hyp) or not np.all(np.isfinite(disc)):
        raise CFLViolation("characteristic speeds became complex or non-finite")
    sq = np.sqrt(np.maximum(disc, 0.0))
    tr = j00 + j11
    return np.maximum(np.abs(0.5 * (tr - sq)), np.abs(0.5 * (tr + sq)))


def llf_fluxes(model, u1, u2, tol: Tolerances = DEFAULT_TOL):
    """Interface fluxes for cells padded with one outflow ghost per side."""
    p1 = np.concatenate([[u1[0]], u1, [u1[-1]]])
    p2 = np.concatenate([[u2[0]], u2, [u2[-1]]])
    f1, f2 = model.flux(p1, p2)
    a = max_speed(model, p1, p2, tol)
    # the midpoint speed keeps viscosity when both cells sit at sonic vertices
    amid = max_speed(model, 0.5 * (p1[:-1] + p1[1:]), 0.5 * (p2[:-1] + p2[1:]), tol)
    am = np.maximum(np.maximum(a[:-1], a[1:]), amid)
    F1 = 0.5 * (f1[:-1] + f1[1:]) - 0.5 * am * (p1[1:] - p1[:-1])
    F2 = 0.5 * (f2[:-1] + f2[1:]) - 0.5 * am * (p2[1:] - p2[:-1])
    return F1, F2, float(np.max(am))


def _clamp(u1, u2):
    """Project onto the triangle; returns the number of cells moved."""
    bad = (u1 < 0) | (u2 < 0) | (u1 + u2 > 1)
    n = int(np.count_nonzero(bad))
    if n:
        np.clip(u1, 0.0, 1.0, out=u1)
        np.clip(u2, 0.0, 1.0, out=u2)
        s = u1 + u2
        over = s > 1
        u1[over] /= s[over]
        u2[over] /= s[over]
    return n


def step(model, grid: Grid1D, dt, tol: Tolerances = DEFAULT_TOL, clamp=True):
    """One explicit Euler step in place; returns the boundary fluxes used."""
    F1, F2, _ = llf_fluxes(model, grid.u1, grid.u2, tol)
    r = dt / grid.dx
    grid.u1 = grid.u1 - r * (F1[1:] - F1[:-1])
    grid.u2 = grid.u2 - r * (F2[1:] - F2[:-1])
    if clamp:
        grid.clamp_events += _clamp(grid.u1, grid.u2)
    grid.t += dt
    grid.steps += 1
    return (F1[0], F2[0]), (F1[-1], F2[-1])


def simulate(model, UL, UR, N, t_end, *, x_extent=X_EXTENT, cfl=0.5, max_speed_limit=1e6,
             tol: Tolerances = DEFAULT_TOL) -> Grid1D:
    """Evolve Riemann data to t_end on N cells over [-x_extent, x_extent]."""
    if not t_end > 0:
        raise ParameterError(f"t_end must be positive, got {t_end}")
    UL = check_state(UL, tol)
    UR = check_state(UR, tol)
    grid = riemann_grid(UL, UR, N, x_extent=x_extent, cfl=cfl)
    while grid.t < t_end * (1 - 1e-14):
        a = llf_fluxes(model, grid.u1, grid.u2, tol)[2]
        if not np.isfinite(a) or a > max_speed_limit:
            raise CFLViolation(f"maximum speed {a} at t = {grid.t}")
        dt = cfl * grid.dx / max(a, 1e-12)
        dt = min(dt, t_end - grid.t)
        step(model, grid, dt, tol)
    return grid


def l1_compare(grid: Grid1D, sol, t, model=None) -> float:
    """L1 distance sum(|du1| + |du2|) dx between the grid and the exact profile."""
    from .riemann import sample_profile

    prof = np.array(sample_profile(sol, grid.x / t, model))
    return float(np.sum(np.abs(grid.u1 - prof[:, 0]) + np.abs(grid.u2 - prof[:, 1])) * grid.dx)
