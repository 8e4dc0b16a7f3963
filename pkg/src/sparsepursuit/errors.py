"""Exception hierarchy shared by all modules."""


class PursuitError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(PursuitError, ValueError):
    """Shapes or indices are inconsistent."""


class DomainError(PursuitError, ValueError):
    """An argument lies outside the domain of a formula or operation."""


class BudgetError(PursuitError):
    """An exhaustive enumeration would exceed its configured budget."""

    def __init__(self, message, count=None):
        super().__init__(message)
        self.count = count


class SingularMatrixError(PursuitError, ArithmeticError):
    """Least squares was asked to solve with a rank-deficient matrix.

    ``condition`` is the ratio of the largest to the smallest absolute
    diagonal entry of the triangular factor, an estimate of the 2-norm
    condition number. ``iteration`` is set by callers that run the solve
    inside an iterative method.
    """

    def __init__(self, message, condition=float("inf"), iteration=None):
        super().__init__(message)
        self.condition = condition
        self.iteration = iteration
