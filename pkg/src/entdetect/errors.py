"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input object violates a structural invariant (shape, hermiticity, trace)."""


class ParameterError(ValueError):
    """A scalar parameter is outside its admissible range."""


class DomainError(ArithmeticError):
    """A matrix function is undefined at some (floored) eigenvalue."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class NumericalError(ArithmeticError):
    """An iteration produced a non-finite or degenerate quantity.

    ``iteration`` is the step at which the failure happened and ``trace``
    holds whatever was recorded before it.
    """

    def __init__(self, message, iteration=None, trace=None):
        super().__init__(message)
        self.iteration = iteration
        self.trace = trace


class InfeasibleParameters(ValueError):
    """The requested accuracy cannot be met with the given discretization."""

    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap
