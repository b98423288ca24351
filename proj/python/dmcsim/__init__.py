"""Python access to the dmc-sim charging simulator.

Configs are passed around as the same ``[section]`` / ``key = value`` text
the command-line tool reads and writes.
"""

from ._core import (
    TELEMETRY_HEADER,
    CalibrationError,
    ConfigError,
    Error,
    InfeasibleLimitsError,
    NonConvergenceError,
    NumericError,
    OverstressError,
    StalledRunError,
    canonical_configs,
    load_config,
    required_capacitance,
    resolve_config,
    run,
    steady_bus_voltage,
    steady_terminal_current,
    summarize,
    transient_charging_current,
)

__all__ = [
    "TELEMETRY_HEADER",
    "CalibrationError",
    "ConfigError",
    "Error",
    "InfeasibleLimitsError",
    "NonConvergenceError",
    "NumericError",
    "OverstressError",
    "StalledRunError",
    "canonical_configs",
    "load_config",
    "required_capacitance",
    "resolve_config",
    "run",
    "steady_bus_voltage",
    "steady_terminal_current",
    "summarize",
    "transient_charging_current",
]
