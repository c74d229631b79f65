"""Retail price competition as a two-player stochastic impulse game."""

from ._core import (
    Action,
    Grid,
    GridSpec,
    ModelParams,
    Quantizer,
    SolverConfig,
    build_gaussian_quantizer,
    corner_line_value,
    market_share,
    no_impulse_value,
    quantizer_moments,
    simulate_ensemble,
    simulate_path,
    solve_system,
)

__all__ = [
    "Action",
    "Grid",
    "GridSpec",
    "ModelParams",
    "Quantizer",
    "SolverConfig",
    "build_gaussian_quantizer",
    "corner_line_value",
    "market_share",
    "no_impulse_value",
    "quantizer_moments",
    "simulate_ensemble",
    "simulate_path",
    "solve_system",
]
