"""Exception hierarchy shared by the library and the CLI."""


class IphsError(Exception):
    """Base class for every error raised by this package."""


class UsageError(IphsError, ValueError):
    """Bad call: wrong dimensions, invalid arguments, empty inputs."""


class NumericError(IphsError, ArithmeticError):
    """A non-finite value turned up where a finite one was required."""


class ModelViolationError(IphsError):
    """A model broke one of its structural promises (e.g. gamma <= 0)."""


class DomainError(IphsError):
    """Evaluation requested outside a model's admissible domain."""


class UnsupportedOperationError(IphsError):
    """The operation is not defined for this kind of system."""


class IntegrationError(IphsError):
    """Raised by the integrator; carries the partial trajectory if any.

    ``stage`` is the RK4 stage index (0..3) at which the failure occurred,
    ``step`` the index of the step being attempted.
    """

    def __init__(self, message, *, stage=None, step=None, trajectory=None, cause=None):
        super().__init__(message)
        self.stage = stage
        self.step = step
        self.trajectory = trajectory
        self.cause = cause


class BalanceViolationError(IntegrationError):
    """Energy or entropy residual exceeded the abort threshold."""
