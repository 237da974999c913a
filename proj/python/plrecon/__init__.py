"""Boundary recovery for the perturbed p-Laplace equation.

Thin wrapper over the compiled core. The INI config format and the
(exit_code, summary, csv) result triple match the `plrecon` command
line tool; see `describe_text` for a dry-run of the experiment plan.
"""

from plrecon._core import (
    ConfigError,
    ExtrapolationError,
    SolveError,
    __version__,
    describe,
    describe_text,
    esti01_max_ratio,
    extrapolate_limit,
    print_config,
    run,
    run_text,
)

__all__ = [
    "ConfigError",
    "ExtrapolationError",
    "SolveError",
    "__version__",
    "describe",
    "describe_text",
    "esti01_max_ratio",
    "extrapolate_limit",
    "print_config",
    "run",
    "run_text",
]
