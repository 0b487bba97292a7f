"""Exception and warning types raised across twistlab."""


class TwistlabError(Exception):
    """Base class for all twistlab errors."""


class EmptyMask(TwistlabError):
    """The cross-section grid has no (or too few) interior nodes."""


class GridMismatch(TwistlabError):
    """Grids passed to an assembly routine are inconsistent."""


class DegenerateInterval(TwistlabError):
    """The interval is shorter than four grid cells."""


class NotConverged(TwistlabError):
    """An iterative eigensolver failed to reach the requested residual.

    Attributes
    ----------
    best_value : float or None
        Best Ritz value available when the solver stopped.
    """

    def __init__(self, message, best_value=None):
        super().__init__(message)
        self.best_value = best_value


class LinearSolveFailure(TwistlabError):
    """A linear solve did not reach its residual target."""


class StepTooLarge(TwistlabError):
    """An ODE step changed the state by more than the allowed fraction."""


class WindowTooShort(TwistlabError):
    """Fewer than the required number of samples fall in a fit window."""


class BoundaryContaminated(TwistlabError):
    """A fit window extends past the boundary-contamination time."""


class PoorFit(TwistlabError):
    """A log-log fit has a coefficient of determination below threshold."""


class ZeroFunction(TwistlabError):
    """An inequality check received the zero function."""


class WeightOverflow(TwistlabError, OverflowError):
    """The Gaussian weight K would overflow on the requested grid."""


class ConfigInvalid(TwistlabError):
    """A run configuration failed validation."""


class TaskFailed(TwistlabError):
    """A task raised an error; the original exception is chained."""


class UnderResolved(UserWarning):
    """The graded grid does not resolve the twist support at this s."""
