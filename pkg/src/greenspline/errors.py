"""Exception hierarchy shared by the library and the command line."""


class GreensplineError(Exception):
    """Base class for all errors raised by greenspline."""


class ValidationError(GreensplineError, ValueError):
    """Invalid input: bad shapes, unsorted or duplicate times, negative lambda."""


class DomainError(ValidationError):
    """An argument lies outside the unit interval [0, 1]."""


class NumericalError(GreensplineError, ArithmeticError):
    """A factorization failed or a conditioning variable is degenerate."""
