"""Python interface to the supOU cumulant scaling library."""

from ._supou import (
    ComputationError,
    ConfigError,
    DomainError,
    MarginalLaw,
    MixingMeasure,
    SizeError,
    UnsupportedOperation,
    aggregate_cumulant,
    correlation,
    correlation_quadrature,
    cumulant_table,
    cumulants_from_moments,
    default_time_grid,
    fit_power_law,
    integrated_factor,
    intermittency_test,
    log_spaced,
    moments_from_cumulants,
    partial_bell,
    partial_sum_factor,
    q_star,
    run_cli,
    scaling_fit,
    simulate_cumulants,
    theoretical_sigma,
    theoretical_tau,
    verify_bdlp_integral,
)

__all__ = [name for name in dir() if not name.startswith("_")]
