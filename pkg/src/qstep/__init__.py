"""Precision bounds and strategy maps for two-parameter quantum estimation.

Computes quantum Fisher information matrices for small probe models, the
joint and stepwise Cramér-Rao-type bounds built from them, the D-invariant
Holevo bound, strategy-region classification, and a sequential Bayesian
protocol whose scaled error is compared against those bounds.
"""

from .bounds import (
    EQ7_THRESHOLD,
    BoundsReport,
    Region,
    Strategy,
    classify_region,
    eq7_sufficiency,
    f_margin,
    fmax_theorem2,
    hcrb_d_invariant,
    je_bound,
    optimal_se,
    se_beats_hcrb_necessary,
    se_bound_lambda1_first,
    se_bound_lambda2_first,
)
from .bayes import (
    TRACE_COLUMNS,
    BayesConfig,
    BayesModel,
    BayesRow,
    BayesTrace,
    PosteriorGrid,
    conditional_likelihood_2,
    ising_model,
    lz_model,
    marginal_likelihood_1,
    marginal_table_for,
    posterior_mean_var,
    posterior_update,
    prior_grids,
    qubit_model,
    run_stepwise_bayes,
    sample_outcomes,
)
from .errors import (
    DegenerateDiagonal,
    DeltaTooLarge,
    DimensionBudget,
    DimensionMismatch,
    GammaOutOfRange,
    NegativeProbability,
    NonHermitianInput,
    OrthogonalStates,
    QstepError,
    SingularQfim,
    StencilFailure,
    UnnormalizedProbs,
    ZeroLikelihood,
)
from .fisher import (
    DerivativeBundle,
    ParamPoint,
    Qfim,
    classical_fim,
    default_step,
    qfim_pure,
    state_derivatives,
    uhlmann_delta,
)
from .models import (
    GaussianConfig,
    IsingConfig,
    LzConfig,
    QubitProbeConfig,
    gaussian_qfim,
    ising_ground_batch,
    ising_hamiltonian,
    ising_measurements,
    ising_state,
    ising_state_info,
    ising_state_map,
    lz_ground_batch,
    lz_hamiltonian,
    lz_measurements,
    lz_state,
    lz_state_info,
    lz_state_map,
    magnetization_povm,
    qubit_measurements,
    qubit_state,
    qubit_state_batch,
    qubit_state_map,
)
from .quantum import (
    EigenPair,
    HermitianOperator,
    Povm,
    PureState,
    born_probabilities,
    eigendecompose,
    ground_state,
    phase_align,
    unitary_from_generator,
)
from .scan import AxisSpec, ScanSpec, evaluate_point, point_report, run_scaling, run_scan

__version__ = "0.1.0"
