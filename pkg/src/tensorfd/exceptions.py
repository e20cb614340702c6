"""Exception types raised by tensorfd."""


class DimensionError(ValueError):
    """Tensor shapes are incompatible with the requested operation."""


class NumericalError(ArithmeticError):
    """A numerical routine failed or produced an inconsistent result."""


class SamplingError(ValueError):
    """A sampling distribution is degenerate (e.g. all weights zero)."""


class SizeCapError(MemoryError):
    """An oracle computation would exceed its configured size cap."""


class StreamFormatError(ValueError):
    """A tensor stream file is malformed or truncated."""
