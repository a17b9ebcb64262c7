"""Numerical tolerances shared by every module."""

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    eps_dom: float = 1e-12      # saturation-triangle slack
    eps_hyp: float = 1e-12      # discriminant below -eps_hyp => complex speeds
    eps_coinc: float = 1e-8     # |lambda_f - lambda_s| below this => near coincidence
    h_nl: float = 1e-5          # finite-difference step for grad(lambda).r
    eps_nl: float = 1e-9        # |grad(lambda).r| below this counts as inflection
    eps_rh: float = 1e-10       # Rankine-Hugoniot residual accepted on a locus
    eps_eq: float = 1e-9        # equality tolerance in Lax / Liu comparisons
    newton_tol: float = 1e-13   # corrector stopping tolerance
    bw_tol: float = 1e-10       # |sigma - lambda| at refined Bethe-Wendroff points
    h_min: float = 1e-5         # continuation step bounds (arclength)
    h_max: float = 1e-2
    h_rar: float = 1e-3         # RK4 step for rarefactions (arclength)
    quad_tol: float = 1e-8      # Richardson estimate accepted per rarefaction piece
    welge_tol: float = 1e-12    # tangency residual for scalar Welge points

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"tolerance {f.name} must be positive")

    def with_overrides(self, **kw):
        return replace(self, **kw)


DEFAULT_TOL = Tolerances()
