"""Exception types shared across the toolkit."""


class JnscError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(JnscError, ValueError):
    """Bad argument, config value, or file content."""


class SingularMatrixError(JnscError):
    """Matrix inversion requested for a singular matrix."""


class RankDeficientError(JnscError):
    """An operation required full column rank and did not get it."""


class TooLargeError(JnscError):
    """Exhaustive enumeration refused because the search space is too big."""


class FieldTooSmallError(JnscError):
    """Random code construction exhausted its attempts at this field size."""


class InfeasibleRateError(JnscError):
    """Requested per-terminal rate exceeds what the network can carry."""


class NetworkFormatError(ValidationError):
    """Malformed network description file; carries a 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")
