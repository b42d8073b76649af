"""Exception types shared across the package."""


class UnsupportedConfigurationError(ValueError):
    """Raised when an operation is asked for a buffer size it has no closed form for."""


class DegenerateRegimeError(ArithmeticError):
    """Raised when a conditional-expectation denominator is numerically degenerate.

    This happens e.g. for arrival rates so small that the probability of any
    arrival during a service is below float resolution, or so large that the
    service-time transform underflows.
    """


class NoDataError(RuntimeError):
    """Raised when a simulation produced no usable departures."""


class ProtocolViolation(RuntimeError):
    """A departure event was applied to an empty server (internal bug)."""
