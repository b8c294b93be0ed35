"""Energy, runtime and fidelity estimates for the semiclassical QFT on
stabilized cat qubits, bare or protected by a repetition code."""

__version__ = "0.1.0"

from .params import (  # noqa: E402
    BilledScenario,
    CodeConfig,
    Config,
    Level,
    MacroFactors,
    OperatingPoint,
    PhysicalConstants,
    default_config,
    load_config,
)

__all__ = [
    "BilledScenario",
    "CodeConfig",
    "Config",
    "Level",
    "MacroFactors",
    "OperatingPoint",
    "PhysicalConstants",
    "default_config",
    "load_config",
]
