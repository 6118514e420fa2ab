# SPDX-License-Identifier: MIT
"""Multiscale stochastic control with a Levy-driven fast volatility factor."""

from ._core import (
    AssumptionError,
    IoError,
    LevyMeasureModel,
    NumericalError,
    black_scholes,
    check_assumptions,
    density,
    effective_vol_harmonic,
    effective_vol_quadratic,
    generator_apply,
    invariant_measure,
    ks_distance,
    levy_exponent,
    lyapunov_drift_check,
    merton_value,
    parse_config,
    run_experiment,
    sample_stationary,
    stable_exponent,
    stationary_cf,
    subordinator_counterexample,
)

__all__ = [
    "AssumptionError",
    "IoError",
    "LevyMeasureModel",
    "NumericalError",
    "black_scholes",
    "check_assumptions",
    "density",
    "effective_vol_harmonic",
    "effective_vol_quadratic",
    "generator_apply",
    "invariant_measure",
    "ks_distance",
    "levy_exponent",
    "lyapunov_drift_check",
    "merton_value",
    "parse_config",
    "run_experiment",
    "sample_stationary",
    "stable_exponent",
    "stationary_cf",
    "subordinator_counterexample",
]
