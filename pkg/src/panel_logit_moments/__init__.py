"""Exact moment-space certification for dynamic panel logit models with
fixed effects, plus a Monte Carlo GMM demonstration.

The exact lane (rationals throughout) builds outcome-probability matrices,
certifies span ranks and moment-space dimensions, and derives canonical
bases of valid moment functions as nullspaces.  The float lane simulates
panels and estimates the state-dependence parameter by GMM.
"""

__version__ = "0.1.0"

from .exact_linalg import (
    Q,
    RationalMatrix,
    det,
    nullspace,
    rank,
    rat_from_str,
    rat_to_str,
    rref_canonicalize,
)
from .model_core import (
    ExpParams,
    ModelSpec,
    all_outcomes,
    index_outcome,
    outcome_index,
    prob_ar1,
    prob_ar2,
    prob_general,
)
from .matrix_builders import (
    AlphaDraws,
    BuiltMatrix,
    build_Pbar,
    build_Pbreve,
    build_Pddot,
    build_Ptilde,
    footnote1_columns,
    lemma1_columns,
    random_alpha_draws,
    ratio_rank1_check,
    unit_b,
)
from .polynomialization import (
    RankCertificate,
    RationalPoly,
    coeff_matrix,
    coeff_matrix_rank,
    column_poly,
    max_degree,
)
from .moment_space import (
    Budget,
    DimensionReport,
    MomentBasis,
    covariate_pattern_experiment,
    default_budget,
    dimension_report,
    expected_dimension,
    expected_span_rank,
    moment_basis,
    span_rank,
    stacked_x_rank,
    standard_grid,
    validate_basis,
)
from .gmm_mc import (
    EstimateResult,
    SearchConfig,
    SimConfig,
    estimate_gmm,
    float_moment_basis,
    monte_carlo,
    simulate_panel,
)
