"""Classical ladder functions for Rosen-Morse II and Kepler-Coulomb wells."""

from .dynamics import (
    Trajectory,
    constant_of_motion_drift,
    frequency_quadrature,
    integrate_hamilton,
    motion_from_ladder,
)
from .errors import (
    AlgebraViolationError,
    BranchSafetyError,
    ConfigurationError,
    ConstructionError,
    DegenerateFactorError,
    InvalidInputError,
    LadderError,
    LimitViolationError,
    NoBoundMotionError,
    NumericalError,
    StencilError,
)
from .factor_algebra import (
    FactorSpec,
    contribution_closed,
    contribution_generic,
    eval_factor,
    exponent_gamma,
    factor_delta,
    phi,
    signature,
)
from .ladder import LadderEval, alpha_closed, eval_ladder, ladder_power, ladder_value
from .limits import flat_kc_limit_check, l_zero_limit_check, pt_limit_check
from .potentials import (
    CurvedKC,
    EnergyWindow,
    FlatKC,
    PhasePoint,
    PoschlTeller,
    RosenMorseII,
    energy_window,
    eval_hamiltonian,
    eval_potential,
    turning_points,
)
from .verification import (
    CheckReport,
    GHAReport,
    appendix_scan,
    poisson_bracket_fd,
    verify_gha,
    verify_representation,
)

__version__ = "0.1.0"
