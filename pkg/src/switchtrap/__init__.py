"""Exact and numerical dynamics of a particle in switched delta-function traps.

Units: hbar = 1, 2m = 1, so the Schrodinger equation reads
``i psi_t = -psi_xx + V psi`` and a well ``-2 mu delta(x)`` binds one state
``sqrt(mu) exp(-mu |x|)`` with energy ``-mu**2``.
"""

from .double_well import (
    DwpState,
    Parity,
    bound_state,
    retrap_probabilities,
    solve_alpha,
    spectrum,
)
from .errors import (
    AccuracyWarning,
    BoundaryContaminationWarning,
    ConfigurationError,
    DomainError,
    NoBoundStateError,
    QuadratureError,
)
from .kick import KickParams, kick_retention, kick_transition, transition_optimum
from .single_well import (
    BoundState1W,
    HopScenario,
    asymptotic_center_value,
    delay_optimum,
    delayed_amplitude,
    evolve_after_switch,
    final_state,
    free_asymptotic,
    initial_state,
    optimal_strength,
    propagate_kernel,
    retention_probability,
)
from .specfun import (
    MoshinskyArgs,
    erfc_complex,
    erfcx_complex,
    faddeeva,
    moshinsky,
    moshinsky_function,
)
from .types import ProbabilityResult

__version__ = "1.0.0"
