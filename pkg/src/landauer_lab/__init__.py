"""Numerical laboratory for heat fluctuation statistics of random Landauer processes."""

__version__ = "0.1.0"

from .errors import (
    DegenerateSpectrumError,
    DomainError,
    InvalidInputError,
    InvalidStrategyError,
    LandauerLabError,
)

__all__ = [
    "DegenerateSpectrumError",
    "DomainError",
    "InvalidInputError",
    "InvalidStrategyError",
    "LandauerLabError",
    "__version__",
]
