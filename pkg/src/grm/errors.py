"""Exception hierarchy shared by every module."""


class GRMError(Exception):
    """Base class for all library errors."""


class InvalidParameters(GRMError, ValueError):
    """Parameters violate a documented precondition."""


class NotPrime(InvalidParameters):
    pass


class ReducibleModulus(InvalidParameters):
    pass


class NoModulusKnown(InvalidParameters):
    pass


class ArityMismatch(InvalidParameters):
    pass


class ShapeMismatch(InvalidParameters):
    pass


class BadArity(InvalidParameters):
    pass


class BadShape(InvalidParameters):
    pass


class BadT(InvalidParameters):
    pass


class BadTail(InvalidParameters):
    pass


class NotInShadow(InvalidParameters):
    pass


class SharedVariables(InvalidParameters):
    pass


class FullExponentInE(InvalidParameters):
    pass


class NotDivisible(GRMError):
    """Raised when the numerator of P is not divisible by x_1...x_{p-1}.

    This cannot happen for a correct implementation.
    """


class BudgetExceeded(GRMError):
    """An exact enumeration would exceed the configured budget."""


class NotFound(GRMError):
    """A randomized search exhausted its budget."""

    def __init__(self, message, trials=0):
        super().__init__(message)
        self.trials = trials
