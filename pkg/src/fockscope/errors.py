"""Exception types shared across the package."""


class FockscopeError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(FockscopeError, ValueError):
    """Operands live in spaces of different size."""


class InvalidStateError(FockscopeError, ValueError):
    """State vector violates a basic invariant (zero norm, wrong length)."""


class InvalidDistributionError(FockscopeError, ValueError):
    """Probability distribution is not normalized within tolerance."""


class SectorError(FockscopeError, ValueError):
    """Requested symmetry sector is empty or incompatible."""


class ModelKindError(FockscopeError, ValueError):
    """A builder was called with a model kind it does not handle."""


class InvalidParameterError(FockscopeError, ValueError):
    """A model or algorithm parameter is out of its legal range."""


class CapacityError(FockscopeError, ValueError):
    """Problem size exceeds a configured dimension cap."""


class KrylovError(FockscopeError, RuntimeError):
    """Krylov propagation failed to reach the requested tolerance."""


class WindowError(FockscopeError, ValueError):
    """A time or index window is empty or outside the recorded data."""


class FitError(FockscopeError, RuntimeError):
    """A curve fit did not converge or has no valid solution."""


class UndefinedCostError(FockscopeError, ValueError):
    """Collapse cost has no in-range comparisons to average over."""


class OptimizationError(FockscopeError, RuntimeError):
    """No optimizer restart produced a usable minimum."""


class ConfigError(FockscopeError, ValueError):
    """A run configuration file failed validation."""
