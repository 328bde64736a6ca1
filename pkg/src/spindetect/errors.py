"""Exception types shared across the package."""


class SpindetectError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SpindetectError):
    """Invalid physical or numerical configuration (bad field values,
    under-resolved grids, unreachable preconditions)."""


class NumericsError(SpindetectError):
    """A numerical routine failed to meet its contract (singular matching
    system after retry, non-convergent quadrature, unphysical dispersion)."""
