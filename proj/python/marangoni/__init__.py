"""Thermocapillary phase-field solver."""

from ._core import (
    Config,
    ConfigError,
    FormatError,
    InvariantViolation,
    Simulation,
    audit,
    double_well,
    inverse_kirchhoff,
    kirchhoff,
    read_diagnostics,
    run,
    solve_steady,
    thresholds,
)

EXIT_SUCCESS = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2
EXIT_SOLVER = 3
EXIT_IO = 4

__all__ = [
    "Config",
    "ConfigError",
    "FormatError",
    "InvariantViolation",
    "Simulation",
    "audit",
    "double_well",
    "inverse_kirchhoff",
    "kirchhoff",
    "read_diagnostics",
    "run",
    "solve_steady",
    "thresholds",
]
