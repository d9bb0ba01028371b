"""Exception hierarchy shared by all scalegeo modules."""


class ScaleGeoError(Exception):
    """Base class for every domain error raised by this package."""


class CapacityExceeded(ScaleGeoError):
    """A value was requested beyond what a finite representation can provide."""


class ScanCapExceeded(ScaleGeoError):
    """An unbounded search hit its configured cap before reaching its target."""


class InvalidBoundaries(ScaleGeoError):
    """Block boundaries must start at 1 and be strictly increasing."""


class BlockOverflow(ScaleGeoError):
    """The permutation does not map the requested truncation range into itself."""


class StateMismatch(ScaleGeoError):
    """A verification was asked about an index the recursion never generated."""


class WitnessNotFoundBelowCap(ScaleGeoError):
    """No divergence witness was found below the index cap.

    Carries the largest ratio seen so the caller can report how close the
    scan came to the threshold.
    """

    def __init__(self, message, best_index=None, best_ratio=None):
        super().__init__(message)
        self.best_index = best_index
        self.best_ratio = best_ratio


class NotPositiveDefinite(ScaleGeoError):
    """Triangular factorization found a nonpositive pivot."""


class ConvergenceFailure(ScaleGeoError):
    """The iterative eigensolver did not meet its tolerance within budget."""


class ModelMismatch(ScaleGeoError):
    """An operation required a diagonal model (or matching shapes) and got none."""


class IndexOutOfRange(ScaleGeoError):
    """A truncation index lies outside the represented range."""
