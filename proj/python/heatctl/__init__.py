"""Minimal-time and minimal-norm control of the 1D semilinear heat equation."""

from ._heatctl import (
    EXIT_FAILURE,
    EXIT_H2_VIOLATION,
    EXIT_INVALID_CONFIG,
    EXIT_OK,
    ArgumentError,
    ConfigError,
    DimensionError,
    Grid,
    H2Violation,
    HeatctlError,
    Nonlinearity,
    Problem,
    bruteforce_alpha,
    eigenmode,
    feasible,
    first_eigenvalue,
    gamma,
    gradient_check,
    l2_norm,
    minimal_norm,
    minimal_time,
    run,
    scalar_alpha,
    scalar_tau,
    simulate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
