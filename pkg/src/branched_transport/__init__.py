"""Self-similar minimizers of a 1+1d branched transport energy.

The cost of a finite affine irrigation tree is branch count integrated in
time plus mass-weighted squared speed; this package constructs the exact
self-similar minimizers (a dyadic cascade below the critical horizon 1/4),
evaluates the recursive characterization of the minimal energy, and
reproduces the certified branch-count bounds that pin the optimal split to
two equal halves.
"""

from .measures import (
    AtomicMeasure,
    MassMismatchError,
    UniformSegment,
    barycenter,
    total_mass,
    w2,
    w2_atomic_atomic,
    w2_atomic_uniform,
)
from .tree import (
    Branch,
    EnergyBreakdown,
    InvalidTreeError,
    TransportTree,
    energy,
    from_json,
    holder_check,
    mirror_time,
    prepend_stationary,
    rescale_mass_time,
    shear,
    to_json,
    trace_at,
    translate,
    validate,
)
from .selfsimilar import (
    CASCADE_CONSTANT,
    CRITICAL_HORIZON,
    MU_STAR_LIMIT_ENERGY,
    barycenter_interval,
    branch_count_thresholds,
    branching_time,
    build_mu_star,
    mu_star_energy,
    optimal_tree,
    optimal_tree_energy,
    select_branch_count,
    symmetric_minimizer,
    symmetric_minimizer_energy,
)
from .recursion import (
    EnergyCurve,
    barycenter_shear_cost,
    branch_count_bound,
    closed_form_energy,
    dyadic_upper_bound,
    equipartition_residual,
    j_ratio,
    minimize_j,
    minimize_recursion,
    recursion_value,
    solve_E,
    t_star_window,
    wasserstein_lower_bound,
)
from .certify import (
    CertificationError,
    CertifiedBound,
    alpha2_certificate,
    certify_all,
    certify_alpha_lower,
    f_ratio,
    f_ratio_prime,
    g_denominator,
    h_sign,
    lipschitz_Lambda,
    monotone_region_eta,
    neq2_suite,
    simplex_bruteforce_alpha,
    two_value_reduction_check,
)
from .kernels import BACKEND

__version__ = "0.1.0"
