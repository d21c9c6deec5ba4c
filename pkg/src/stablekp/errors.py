"""Exception hierarchy shared across the package."""


class StableKPError(Exception):
    """Base class for all package errors."""


class ConfigError(StableKPError):
    """Invalid configuration value or unusable argument combination."""


class ShapeError(StableKPError):
    """Array dimensions do not agree."""


class DataError(StableKPError):
    """Input data failed validation (missing file, bad cell, non-finite value)."""


class NumericError(StableKPError):
    """A numerical operation failed beyond recovery.

    ``min_eigenvalue`` carries the smallest-eigenvalue estimate when a
    factorization ran out of jitter.
    """

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class KernelOverflowError(NumericError):
    """Kernel recursion produced non-finite entries; ``layer`` is the 1-based
    layer index at which the overflow was detected."""

    def __init__(self, message, layer=None):
        super().__init__(message)
        self.layer = layer
