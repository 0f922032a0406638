class MinEntropyError(Exception):
    """Base class for all toolkit errors"""


class InvalidParameterError(MinEntropyError, ValueError):
    """A numeric parameter violates an operation's precondition"""


class TruncationError(MinEntropyError):
    """The Fock cutoff is too small for the requested accuracy"""


class ConvergenceError(MinEntropyError):
    """A quadrature, series or grid did not reach its tolerance"""


class IdentityViolationError(MinEntropyError):
    """A closed-form identity failed its numerical cross-check"""


class ConjectureViolationError(MinEntropyError):
    """A search found an output entropy below the coherent-state value"""

    def __init__(self, gap: float, message: str = ""):
        self.gap = gap
        super().__init__(message or f"negative entropy gap {gap:.3e}")
