"""
Posterior approximation: priors, normal mixtures, bandwidth tuning and the iteration loop
"""
from .bandwidth import (
    TuningResult,
    localize,
    loo_objective,
    optimize_h,
    select_tuning,
)
from .engine import (
    IterationDiagnostics,
    RunConfig,
    init_approximation,
    iterate_once,
    l1_distance,
    posterior_log_density,
    run,
)
from .mixture import (
    NormalMixture,
    WeightedSample,
    entropy,
    flatten_weights,
    mixture_log_density,
    mixture_moments,
    mixture_sample,
    weighted_covariance,
)
from .priors import (
    ParameterLayout,
    PriorSpec,
    from_working,
    gamma_from_mode_variance,
    log_prior_working,
    natural_samples,
    natural_vector,
    to_working,
)

__all__ = [
    "PriorSpec",
    "ParameterLayout",
    "gamma_from_mode_variance",
    "to_working",
    "from_working",
    "natural_vector",
    "natural_samples",
    "log_prior_working",
    "NormalMixture",
    "WeightedSample",
    "mixture_log_density",
    "mixture_sample",
    "mixture_moments",
    "entropy",
    "flatten_weights",
    "weighted_covariance",
    "TuningResult",
    "loo_objective",
    "optimize_h",
    "localize",
    "select_tuning",
    "RunConfig",
    "IterationDiagnostics",
    "init_approximation",
    "posterior_log_density",
    "iterate_once",
    "l1_distance",
    "run",
]
