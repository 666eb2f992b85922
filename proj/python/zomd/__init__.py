"""Zeroth-order mirror descent with Gaussian smoothing under a biased noise oracle."""

from ._zomd import (
    ConfigError,
    DimensionError,
    DomainError,
    Error,
    FeasibleSet,
    Geometry,
    Noise,
    Objective,
    PreconditionError,
    Problem,
    StepSchedule,
    burn_in_index,
    cmd_bounds,
    cmd_run,
    cmd_verify_estimator,
    concentration_bound,
    estimate_gradient,
    min_iterations_for_confidence,
    optimal_mu,
    radius_at_mu,
    run,
    run_ensemble,
    verify_estimator,
    wilson_interval,
)

__all__ = [name for name in dir() if not name.startswith("_")]
