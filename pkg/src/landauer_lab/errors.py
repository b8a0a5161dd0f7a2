"""Exception hierarchy shared across the package."""


class LandauerLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(LandauerLabError, ValueError):
    """An argument fails a structural precondition (shape, symmetry, range)."""


class DomainError(LandauerLabError, ValueError):
    """Inputs are structurally fine but outside the mathematical domain."""


class DegenerateSpectrumError(DomainError):
    """A spectral gap required by a temperature scale is (numerically) zero."""


class InvalidStrategyError(InvalidInputError):
    """A pluggable strategy violated its contract (e.g. negative correction)."""
