"""Wave curves, effective flux functions and Riemann solutions for 2x2 systems.

The Corey quadratic three-phase model is provided; any object implementing
:class:`rieff.flux_model.FluxModel` can be used instead.
"""

from .config import DEFAULT_TOL, Tolerances
from .errors import RieffError
from .flux_model import CoreyModel, FluxModel, State, char_fields, eval_flux, jacobian, nonlinearity
from .hugoniot import HugoniotBranch, find_bethe_wendroff, lax_classify, liu_trim, shock_speed, trace_hugoniot
from .rarefaction import RarefactionSegment, cross_coincidence, find_inflection, integrate_rarefaction
from .eff import (
    U1,
    U2,
    U3,
    BaseCurve,
    EffectiveFlux,
    ParamCoordinate,
    SampledFlux,
    build_eff,
    lift_rarefaction,
    lift_shock,
    lifting_identity_error,
    make_base_curve,
)
from .scalar_hull import ScalarWave, corey_welge_closed_form, hull_solution, welge_point
from .riemann import RiemannSolution, WaveCurve, sample_profile, solve_riemann, wave_curve
from .fvm_check import Grid1D, l1_compare, simulate

__version__ = "0.1.0"
