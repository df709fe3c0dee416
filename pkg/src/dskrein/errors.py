"""Exception types shared across the package."""


class DsKreinError(Exception):
    """Base class for all package errors."""


class CutError(DsKreinError, ValueError):
    """Evaluation requested exactly on a branch cut with no regulator."""


class PoleError(DsKreinError, ValueError):
    """Evaluation requested at a pole of the function."""


class ConvergenceError(DsKreinError, RuntimeError):
    """An iterative scheme failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class SupportError(DsKreinError, ValueError):
    """A test function's support escapes the admissible chart window."""


class NormalizationError(DsKreinError, ValueError):
    """A reference function does not satisfy its normalization contract."""


class IllConditionedError(DsKreinError, RuntimeError):
    """Numerical rank collapsed below what the construction requires."""
