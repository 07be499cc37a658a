"""Exact noise figures and lower bounds for quantum measurements that must
respect an additive conservation law, at desk scale.

The package computes, for finite-dimensional indirect measurement models,
the exact measurement noise, checks the conservation-law and Yanase
residuals and the full uncertainty-relation derivation chain as numerical
identities, and searches over conservation-respecting interactions to probe
how closely the error floors can be approached.
"""

__version__ = "0.1.0"

from .linalg import (
    DimensionMismatch,
    Ket,
    Operator,
    PreconditionError,
    SpectralDecomposition,
    StructureError,
    TheoremViolation,
    basis_ket,
    commutator,
    expectation,
    frobenius_norm,
    identity,
    random_hermitian,
    random_ket,
    random_unitary,
    spectral,
    tensor,
    variance,
    zero_operator,
)
from .measurement import (
    MeasurementModel,
    OutcomeDistribution,
    bsf_deviation,
    error_probability,
    heisenberg_probe,
    noise,
    noise_operator,
    outcome_distribution,
    sup_noise,
)
from .bounds import (
    BoundReport,
    ConservationPair,
    acl_residual,
    bound_comparison,
    bound_report,
    commutator_identity_residual,
    fundamental_bound,
    invariance_residual,
    optimal_spin_bound,
    spin_bound,
    uncertainty_pair,
    variance_additivity_residual,
    yanase_bound,
    yanase_residual,
)
from .spin import (
    SpinBasis,
    YWModel,
    named_state,
    random_yw_model,
    spin_basis,
    spin_operators,
    swap_demo_model,
    trivial_demo_model,
    yw_check_bound,
    yw_eps_y,
    yw_error_at_alpha_y,
    yw_sample_model,
)
from .oscillator import (
    CoherentAmplitudes,
    FockSpace,
    coherent_state,
    lowering_operator,
    m_z_operator,
    number_operator,
    oscillator_bound,
    total_number_operator,
    two_mode_coherent_state,
)
from .optimizer import (
    CommutantBasis,
    OptimizationRun,
    OptimizerConfig,
    SweepRow,
    commutant_basis,
    conservative_unitary,
    hermitian_coordinates,
    numerical_gradient,
    optimize_noise,
    oscillator_probe,
    record_observable,
    spin_ladder_probe,
    sweep_probe_size,
)
