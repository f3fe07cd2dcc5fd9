"""grainkin: self-similar steady states of a kinetic grain-growth model.

Number densities of grains with topological class n = 2..N evolve by
class-dependent transport in rescaled area plus a tridiagonal class
coupling whose intensity Gamma is chosen self-consistently so the total
area and the polyhedral defect are conserved exactly.  The package relaxes
the upwind semi-discretization to steady state and verifies the resulting
profiles against the identities, decay laws, and singular-point behaviour
the steady states must satisfy.
"""

from .backends import backend_name, select_backend
from .errors import (
    ConfigError,
    EmptyWindow,
    GrainkinError,
    IntervalTouchesSingularity,
    NonpositiveDenominator,
    NotConverged,
    SingularProjection,
    TooCloseToBoundary,
)
from .model import (
    CouplingWeights,
    Grid,
    Moments,
    Parameters,
    State,
    apply_coupling,
    coupling_matrix,
    gamma,
    gamma_terms,
    moments,
)
from .dynamics import (
    RhsEvaluation,
    SteadyStateReport,
    apriori_gamma_bound,
    euler_step,
    initial_state,
    integrate_to_steady,
    project_initial,
    residual_norm,
    rhs,
    stable_dt,
)
from .diagnostics import (
    DecayDiagnostics,
    IdentityResiduals,
    SingularityReport,
    SingularityRow,
    classify_singularities,
    decay_diagnostics,
    epsilon_convergence,
    n_convergence,
    ode_oracle,
    phi_map,
    verify_steady_identities,
)

__version__ = "0.1.0"
