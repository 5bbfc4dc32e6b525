"""Exception hierarchy.

The CLI maps :class:`ValidationError` subclasses to exit code 1 and
:class:`NumericalError` subclasses to exit code 3.
"""


class HololoopError(Exception):
    """Base class for all package errors."""


class ValidationError(HololoopError, ValueError):
    """Bad input: wrong shape, wrong symmetry, unknown name."""


class NumericalError(HololoopError, ArithmeticError):
    """An algorithm failed on input that passed validation."""


class NotHermitian(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class UnknownGate(ValidationError):
    pass


class WindingTooSmall(ValidationError):
    pass


class ResolutionTooLow(ValidationError):
    pass


class QubitOutOfRange(ValidationError):
    pass


class DuplicateTarget(ValidationError):
    pass


class LocalityViolation(HololoopError):
    """Realized gate acts on a qubit it should leave alone."""


class NoConvergence(NumericalError):
    pass


class Singular(NumericalError):
    pass
