"""
smallball: concentration functions of weighted sums and inverse Littlewood-Offord structure

MIT License - See LICENSE file for details

Features:
- Exact concentration functions Q(F, lambda) of discrete laws and of weighted sums
  S_a = sum_k a_k X_k, with seeded Monte Carlo when the exact law is too large
- The smoothing law H^lambda: characteristic function, sampling, the atom at zero
  and the Esseen bound for Q(H^lambda, delta)
- Symmetric generalized arithmetic progressions (GAPs): enumeration, distances,
  coverage, K_1(u) cubes and coordinate products
- The beta_{r,m}(W, tau) infimum with an exact brute-force oracle
- GAP fitting, planted instances and constant-free structure reports
- A command-line runner with JSON/CSV output, manifests and parameter sweeps
"""

__version__ = "0.1.0"

from smallball.exceptions import (
    AtomBudgetExceeded,
    DegenerateEstimateError,
    GapCapExceeded,
    InvalidDistributionError,
    InvalidParameterError,
    QuadratureError,
    SmallballError,
    UnsupportedRankError
)

from smallball.config import SmallballConfig

# Import common models
from smallball.models import (
    # Distributions
    AtomicMeasure, DiscreteDist, WeightVector,

    # Results and reports
    BoundReport, ConcentrationResult, CoordinateBounds, InequalityId, MCConfig, Method,

    # Smoothing law
    AtomMassResult, SmoothingEstimate, SmoothingLaw,

    # GAPs
    BetaResult, CoverageReport, GAPFamily, Norm, PointSetRegion, ProductRegion, SymmetricGAP,

    # Inverse principle
    InversePrincipleReport, PlantedInstance, StructureReport,

    # Runs
    ExperimentConfig
)

from smallball.dist import (
    check_spread,
    convolve,
    levy_base_measure,
    load_distribution,
    load_weights,
    make_discrete,
    named_law,
    project,
    symmetrize,
    tail_mass,
    vector_sum_law,
    weighted_sum_law
)
from smallball.concentration import (
    q_brute_force,
    q_coordinate_bounds,
    q_exact,
    q_monte_carlo,
    q_weighted_sum,
    q_window_regularity
)
from smallball.infdiv import (
    esseen_bound,
    esseen_integral,
    h_cf,
    mass_at_zero,
    q_h_estimate,
    sample_h,
    smoothing_atom_bound,
    smoothing_bound
)
from smallball.gap import (
    beta,
    beta_bound,
    beta_oracle,
    coverage,
    gap_distance,
    gap_points,
    k1_construct,
    measure_outside,
    product_k1
)
from smallball.inverse import (
    fit_gap,
    fit_oracle,
    plant,
    verify_inverse_cardinality,
    verify_k1_log_n,
    verify_k1_structure
)

__all__ = [
    # Errors
    "SmallballError", "InvalidDistributionError", "InvalidParameterError",
    "AtomBudgetExceeded", "GapCapExceeded", "QuadratureError",
    "DegenerateEstimateError", "UnsupportedRankError",

    # Configuration
    "SmallballConfig",

    # Models
    "AtomicMeasure", "DiscreteDist", "WeightVector",
    "BoundReport", "ConcentrationResult", "CoordinateBounds", "InequalityId", "MCConfig", "Method",
    "AtomMassResult", "SmoothingEstimate", "SmoothingLaw",
    "BetaResult", "CoverageReport", "GAPFamily", "Norm", "PointSetRegion", "ProductRegion", "SymmetricGAP",
    "InversePrincipleReport", "PlantedInstance", "StructureReport",
    "ExperimentConfig",

    # Distributions
    "check_spread", "convolve", "levy_base_measure", "load_distribution", "load_weights",
    "make_discrete", "named_law", "project", "symmetrize", "tail_mass",
    "vector_sum_law", "weighted_sum_law",

    # Concentration
    "q_brute_force", "q_coordinate_bounds", "q_exact", "q_monte_carlo", "q_weighted_sum",
    "q_window_regularity",

    # Smoothing law
    "esseen_bound", "esseen_integral", "h_cf", "mass_at_zero", "q_h_estimate", "sample_h",
    "smoothing_atom_bound", "smoothing_bound",

    # GAPs
    "beta", "beta_bound", "beta_oracle", "coverage", "gap_distance", "gap_points",
    "k1_construct", "measure_outside", "product_k1",

    # Inverse principle
    "fit_gap", "fit_oracle", "plant", "verify_inverse_cardinality", "verify_k1_log_n",
    "verify_k1_structure",
]
