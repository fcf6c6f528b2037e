"""Exception hierarchy shared by every applab module."""


class ApplabError(Exception):
    """Base class for all library errors."""


class DomainError(ApplabError, ValueError):
    """An argument lies outside the domain of the operation."""


class DivergentMomentError(DomainError):
    """A requested kernel moment does not exist (n*rho <= r*c)."""


class PositivityError(ApplabError, ValueError):
    """A basis weight came out negative."""

    def __init__(self, index, x, value):
        self.index = index
        self.x = x
        self.value = value
        super().__init__(f"negative weight w_{index} = {value!r} at x = {x!r}")


class TruncationError(ApplabError, ArithmeticError):
    """The weight series could not be truncated within the horizon cap."""


class ValidationError(ApplabError, ValueError):
    """A power-series pair or operator spec violates its constraints."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class AccuracyError(ApplabError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    ``estimate`` and ``error`` carry the best value obtained.
    """

    def __init__(self, message, estimate=None, error=None):
        self.estimate = estimate
        self.error = error
        super().__init__(message)
