"""Optimal investment when the asset can only be traded at random arrival times."""

from ._core import (
    ConfigError,
    Intensity,
    Market,
    Representation,
    SimConfig,
    Solver,
    SolverConfig,
    UnsupportedModel,
    Utility,
    __version__,
    convergence_sweep,
    merton_value,
    run,
    simulate,
    simulate_constant,
    supersolution,
)

__all__ = [
    "ConfigError",
    "Intensity",
    "Market",
    "Representation",
    "SimConfig",
    "Solver",
    "SolverConfig",
    "UnsupportedModel",
    "Utility",
    "__version__",
    "convergence_sweep",
    "merton_value",
    "run",
    "simulate",
    "simulate_constant",
    "supersolution",
]
