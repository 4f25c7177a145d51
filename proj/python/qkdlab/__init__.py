"""Finite-key rates for BB84 and six-state QKD with added noise."""

from ._qkdlab import (
    CSV_HEADER,
    DomainError,
    Error,
    InfeasibleError,
    NoKeyError,
    RateBreakdown,
    SecurityBudget,
    aep_penalty,
    asymptotic_rate,
    binary_entropy,
    disturbance_threshold,
    find_n0,
    finite_rate,
    optimal_noise,
    optimize_rate,
    sweep_csv,
    verify,
    zeta,
)

__all__ = [
    "CSV_HEADER",
    "DomainError",
    "Error",
    "InfeasibleError",
    "NoKeyError",
    "RateBreakdown",
    "SecurityBudget",
    "aep_penalty",
    "asymptotic_rate",
    "binary_entropy",
    "disturbance_threshold",
    "find_n0",
    "finite_rate",
    "optimal_noise",
    "optimize_rate",
    "sweep_csv",
    "verify",
    "zeta",
]
