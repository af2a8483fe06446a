"""Exception types shared across the package."""


class GwnnError(Exception):
    """Base class for errors raised by this package."""


class DataError(GwnnError):
    """Malformed or inconsistent input data (files, indices, splits)."""


class NumericalError(GwnnError):
    """A numerical procedure failed (non-convergence, invalid operand)."""
