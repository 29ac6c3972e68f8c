"""Exception hierarchy shared across the package."""


class CondentError(Exception):
    """Base class for all condent errors."""


class InvalidInputError(CondentError):
    """A precondition on user-supplied data or parameters was violated."""


class InconclusiveError(CondentError):
    """A Monte Carlo check could not reach its required sample support.

    Carries the number of conditioned hits actually observed so callers
    can decide whether to rerun with more replicates.
    """

    def __init__(self, message, hits=0):
        super().__init__(message)
        self.hits = hits
