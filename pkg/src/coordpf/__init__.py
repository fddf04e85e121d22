"""State estimation with per-dimension weight updates and resampling.

The package bundles a bootstrap particle filter, a coordinate particle
filter that re-weights dimension by dimension, a linear-Gaussian reference
system with a Kalman oracle, and a benchmark harness exposed both as a
FastAPI service and as the ``bench`` command-line client.
"""

from .sampling import (
    LOG_ZERO,
    DegenerateEnsembleError,
    DegenerateEnsembleWarning,
    SeedSpec,
    WeightedParticles,
    draw_standard_normal,
    effective_sample_size,
    multinomial_resample,
    normalize_log_weights,
    systematic_resample,
)
from .ssm import NoisePrefix, PartialLikelihoodProvider, StateSpaceModel
from .linear_gaussian import (
    CorrelatedCovariance,
    KalmanBelief,
    LinearGaussianModel,
    ObservationCovariance,
    block_covariance,
    build_covariance,
    kalman_filter,
    kalman_step,
)
from .filters import (
    FilterConfig,
    FilterRun,
    FilterState,
    cpf_dimension_update,
    cpf_step,
    cpf_time_update,
    estimate_mean,
    init_filter,
    pf_step,
    run_filter,
)

__all__ = [
    "LOG_ZERO",
    "DegenerateEnsembleError",
    "DegenerateEnsembleWarning",
    "SeedSpec",
    "WeightedParticles",
    "draw_standard_normal",
    "effective_sample_size",
    "multinomial_resample",
    "normalize_log_weights",
    "systematic_resample",
    "NoisePrefix",
    "PartialLikelihoodProvider",
    "StateSpaceModel",
    "CorrelatedCovariance",
    "KalmanBelief",
    "LinearGaussianModel",
    "ObservationCovariance",
    "block_covariance",
    "build_covariance",
    "kalman_filter",
    "kalman_step",
    "FilterConfig",
    "FilterRun",
    "FilterState",
    "cpf_dimension_update",
    "cpf_step",
    "cpf_time_update",
    "estimate_mean",
    "init_filter",
    "pf_step",
    "run_filter",
]

__version__ = "0.1.0"
