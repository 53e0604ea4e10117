"""Diversified block-sparse Bayesian learning for compressed sensing."""

__version__ = "0.1.0"

from .model import (
    BlockLayout,
    DiversifiedPrior,
    MeasurementModel,
    Posterior,
    SolveResult,
    SolverConfig,
    assemble_prior_covariance,
    block_view,
)
from .inference import (
    DualState,
    common_correlation,
    compute_posterior,
    cost,
    diversify_complete,
    dual_step,
    prune,
    q_grad_sqrt_gamma,
    q_value,
    solve,
    toeplitz_correct,
    unconstrained_correlation,
    update_beta,
    update_gamma,
)
from .baselines import bsbl_strong_solve, sbl_reference_step, sbl_solve
from .datagen import (
    GroundTruth,
    SignalSpec,
    add_noise,
    dct_basis,
    gen_block_sparse,
    gen_design_matrix,
)
from .metrics import (
    TrialMetrics,
    block_hit_rate,
    corr,
    credible_interval,
    nmse,
    phase_success,
    sqrt_nmse,
)
from .estimators import BlockSBL, ClassicSBL, DivSBL

__all__ = [
    "BlockLayout", "DiversifiedPrior", "MeasurementModel", "Posterior",
    "SolveResult", "SolverConfig", "assemble_prior_covariance", "block_view",
    "DualState", "common_correlation", "compute_posterior", "cost",
    "diversify_complete", "dual_step", "prune", "q_grad_sqrt_gamma",
    "q_value", "solve", "toeplitz_correct", "unconstrained_correlation",
    "update_beta", "update_gamma",
    "bsbl_strong_solve", "sbl_reference_step", "sbl_solve",
    "GroundTruth", "SignalSpec", "add_noise", "dct_basis",
    "gen_block_sparse", "gen_design_matrix",
    "TrialMetrics", "block_hit_rate", "corr", "credible_interval", "nmse",
    "phase_success", "sqrt_nmse",
    "BlockSBL", "ClassicSBL", "DivSBL",
]
