"""Exception hierarchy shared by all modules."""


class JangBenchError(Exception):
    """Base class for package errors."""


class ValidationError(JangBenchError, ValueError):
    """Invalid parameters or input data."""


class DomainError(JangBenchError, ValueError):
    """Evaluation point outside the data domain."""


class DegenerateError(JangBenchError, ValueError):
    """The warp factor vanishes or is negative where it must be positive."""


class NumericError(JangBenchError, ArithmeticError):
    """Non-finite values or failed numerical procedures."""


class RegimeError(JangBenchError, ValueError):
    """Parameters (b, l) outside the regime a construction supports."""


class SteepGraphError(JangBenchError, ValueError):
    """Slice metric component g_11 is not positive: graph too steep."""


class UnsupportedError(JangBenchError, NotImplementedError):
    """Operation not available for the given data."""


class ConfigError(JangBenchError, ValueError):
    """Configuration text could not be parsed or validated."""
