"""Exception hierarchy shared by all modules."""


class DiagnosisError(Exception):
    """Base class for errors raised by :mod:`arraydiag`."""


class DomainError(DiagnosisError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(DiagnosisError, ValueError):
    """A requested size exceeds what the design or budget can provide."""


class IllConditionedError(DiagnosisError, ArithmeticError):
    """A Gram matrix is too close to singular to invert reliably."""


class DegenerateProblemError(DiagnosisError, ArithmeticError):
    """A least-squares refit on the selected columns is rank deficient."""
