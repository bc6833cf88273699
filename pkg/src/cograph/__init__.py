"""Co-evolving graph dynamics: nonlocal continuity equations with evolving edge weights."""
from .config import ScenarioConfig, parse_config, preset_config, presets
from .dynamics import (
    CoupledState,
    System,
    Trajectory,
    dtilde_inf,
    eta_lower_bound_curve,
    integrate,
    mass_drift,
    picard_solve,
    positivity_check,
    rhs,
    step,
    step_eta_exact,
    step_rk4,
)
from .errors import (
    BlowUpError,
    ConfigError,
    ContractViolation,
    HorizonTooLongError,
    InvalidInputError,
)
from .fields import (
    AlphaProfile,
    BoundsLedger,
    InteractionKernelSpec,
    OmegaSpec,
    StaticVelocity,
    constants_of,
    monotonicity_suite,
    omega_eval,
    velocity_from_alpha,
    velocity_from_kernel,
)
from .graph import (
    BaseMeasure,
    EdgeField,
    adjointness_defect,
    nonlocal_divergence,
    nonlocal_gradient,
)
from .graph_ce import (
    AtomicDisintegration,
    advect,
    field_X,
    flow_constants,
    flow_property_suite,
    stability_experiment,
)
from .interpolation import FluxInterpolation, admissibility_suite
from .metrics import (
    AtomSet1D,
    contraction_dissipation,
    diameter,
    dmu_sup,
    inf_bound_curve,
    l2mu_d2,
    sup_bound_curve,
    wasserstein_1d,
)
from .oracle import (
    BernoulliParams,
    bernoulli_closed_form,
    bruteforce_w2,
    bruteforce_wp,
    comparison_lemma_check,
    convergence_study,
    reference_integrate,
)
from .report import Check, Report
from .scenarios import RunResult, build, execute

__version__ = "0.1.0"
