"""Exception hierarchy shared by all modules."""


class OptrecError(Exception):
    """Base class for every error raised by optrec."""


class InvalidArgument(OptrecError, ValueError):
    pass


class DomainError(OptrecError, ValueError):
    """A point lies outside the interval [0, 1]."""


class UnsupportedParameter(OptrecError, ValueError):
    pass


class NumericalFailure(OptrecError, ArithmeticError):
    def __init__(self, message, iteration=None):
        super().__init__(message if iteration is None else f"{message} (iteration {iteration})")
        self.detail = message
        self.iteration = iteration


class DegenerateCertificate(OptrecError):
    """The radius bracket collapses because the data interpolant lies on the boundary of K."""
