"""Active preference learning: confidence-aware responses, query synthesis,
pool approximation, and preference-based controller gain tuning."""

from prefsynth.links import LogisticLink
from prefsynth.response import (
    QueryPair,
    Hyperplane,
    ResponseModel,
    OracleConfig,
    f_value,
    f_value_hyperplane,
    response_probability,
    simulate_response,
)
from prefsynth.posterior import (
    PriorSpec,
    ResponseRecord,
    PosteriorState,
    SamplerConfig,
    log_posterior,
    sample_posterior,
    estimate_user,
)
from prefsynth.infogain import (
    MIEstimate,
    MIGradient,
    MIHessian,
    MahalanobisMetric,
    binary_entropy,
    mutual_information,
    mi_gradient,
    mi_hessian,
    build_metric,
    mahalanobis_distance,
)
from prefsynth.synthesis import SynthesizedQuery, optimize_magnitude, synthesize
from prefsynth.strategies import (
    ItemPool,
    StrategyConfig,
    SelectionResult,
    select_query,
)

__all__ = [
    "LogisticLink",
    "QueryPair",
    "Hyperplane",
    "ResponseModel",
    "OracleConfig",
    "f_value",
    "f_value_hyperplane",
    "response_probability",
    "simulate_response",
    "PriorSpec",
    "ResponseRecord",
    "PosteriorState",
    "SamplerConfig",
    "log_posterior",
    "sample_posterior",
    "estimate_user",
    "MIEstimate",
    "MIGradient",
    "MIHessian",
    "MahalanobisMetric",
    "binary_entropy",
    "mutual_information",
    "mi_gradient",
    "mi_hessian",
    "build_metric",
    "mahalanobis_distance",
    "SynthesizedQuery",
    "optimize_magnitude",
    "synthesize",
    "ItemPool",
    "StrategyConfig",
    "SelectionResult",
    "select_query",
]
