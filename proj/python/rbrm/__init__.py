"""Minimum-uncertainty roadmap planning under intermittent sensing."""

from _rbrm import (  # noqa: F401
    ComplexityGuardError,
    InvalidInputError,
    NoPathError,
    __version__,
    bound_horizon_closed_form,
    bound_step_deterministic,
    bound_step_simplified,
    bound_step_stochastic,
    bound_step_uniform,
    eig_extremes,
    invert_pd,
    is_psd,
    plan,
    propagate_bound_sequence,
    simulate,
    subset_coeffs,
    sweep,
)

__all__ = [
    "ComplexityGuardError",
    "InvalidInputError",
    "NoPathError",
    "bound_horizon_closed_form",
    "bound_step_deterministic",
    "bound_step_simplified",
    "bound_step_stochastic",
    "bound_step_uniform",
    "eig_extremes",
    "invert_pd",
    "is_psd",
    "plan",
    "propagate_bound_sequence",
    "simulate",
    "subset_coeffs",
    "sweep",
]
