"""Exception types raised across the package."""


class DataError(ValueError):
    """Input data cannot support the requested computation."""


class ConvergenceError(RuntimeError):
    """An optimiser failed to converge after all restarts.

    Parameters
    ----------
    message : str
        Description of the failure.
    best : object, optional
        Best point found before giving up.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class StudyError(RuntimeError):
    """A Monte-Carlo study had too many failed replications."""
