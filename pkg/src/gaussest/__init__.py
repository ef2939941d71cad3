"""Learned-prior Bayesian estimation of displacement, squeezing and phase of single-mode Gaussian states."""
from .conjugate import (
    EmOptions,
    EmResult,
    GaussianParams,
    LinearGaussianModel,
    em_fit,
    gaussian_posterior,
    marginal_log_likelihood,
    q_function,
)
from .displacement import DisplacementEstimate, estimate_heterodyne, estimate_homodyne, genie_estimate
from .phase import (
    EbOptions,
    PhaseEstimate,
    VonMisesParam,
    eb_objective,
    estimate_phase,
    fit_kappa0,
    genie_phase_estimate,
    posterior_kappa,
    von_mises_log_pdf,
)
from .simulate import (
    MeasurementBatch,
    ProbeConfig,
    RngStream,
    Scheme,
    heterodyne_variances,
    homodyne_variance,
    povm_variance,
    sample_von_mises,
    simulate_displacement_heterodyne,
    simulate_displacement_homodyne,
    simulate_phase_heterodyne,
    simulate_squeezing_homodyne,
    simulate_squeezing_povm,
)
from .special import log_i0
from .squeezing import (
    SqueezingEstimate,
    estimate_ml_homodyne,
    estimate_povm_em,
    genie_povm_estimate,
    homodyne_squeezing_loglik,
)
from .experiments import ExperimentConfig, ExperimentSummary, Task, run_experiment, write_summary_csv
from ._validation import DegenerateDataError, DomainError

__version__ = "0.1.0"

__all__ = [
    "EmOptions",
    "EmResult",
    "GaussianParams",
    "LinearGaussianModel",
    "em_fit",
    "gaussian_posterior",
    "marginal_log_likelihood",
    "q_function",
    "EbOptions",
    "PhaseEstimate",
    "VonMisesParam",
    "eb_objective",
    "estimate_phase",
    "fit_kappa0",
    "genie_phase_estimate",
    "posterior_kappa",
    "von_mises_log_pdf",
    "MeasurementBatch",
    "ProbeConfig",
    "RngStream",
    "Scheme",
    "heterodyne_variances",
    "homodyne_variance",
    "povm_variance",
    "sample_von_mises",
    "simulate_displacement_heterodyne",
    "simulate_displacement_homodyne",
    "simulate_phase_heterodyne",
    "simulate_squeezing_homodyne",
    "simulate_squeezing_povm",
    "SqueezingEstimate",
    "estimate_ml_homodyne",
    "estimate_povm_em",
    "genie_povm_estimate",
    "homodyne_squeezing_loglik",
    "DisplacementEstimate",
    "estimate_heterodyne",
    "estimate_homodyne",
    "genie_estimate",
    "log_i0",
    "ExperimentConfig",
    "ExperimentSummary",
    "Task",
    "run_experiment",
    "write_summary_csv",
    "DegenerateDataError",
    "DomainError",
]
