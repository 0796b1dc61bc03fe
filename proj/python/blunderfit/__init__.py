"""Least-squares fitting with adaptive exclusion of blundered measurements."""

from ._core import (
    InsufficientDataError,
    ParseError,
    SingularModelError,
    fit_wls,
    inv_psi,
    k_gamma_approx,
    k_gamma_exact,
    kappa_limit,
    load_csv,
    normal_quantile,
    poisson_excess_prob,
    psi,
    run_exclusion,
    simulate_blunders,
    simulate_null,
)

__version__ = "0.1.0"

__all__ = [
    "InsufficientDataError",
    "ParseError",
    "SingularModelError",
    "fit_wls",
    "inv_psi",
    "k_gamma_approx",
    "k_gamma_exact",
    "kappa_limit",
    "load_csv",
    "normal_quantile",
    "poisson_excess_prob",
    "psi",
    "run_exclusion",
    "simulate_blunders",
    "simulate_null",
]
