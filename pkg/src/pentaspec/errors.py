"""Exception hierarchy shared by all modules."""


class PentaspecError(Exception):
    """Base class for every error raised by the library."""


class DomainError(PentaspecError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class ModelInconsistencyError(PentaspecError, ValueError):
    """Coefficient model whose declared limits contradict each other."""


class SpectralRegionError(DomainError):
    """Spectral parameter inside (or too close to) the essential spectrum."""


class PivotError(PentaspecError, ArithmeticError):
    """A recurrence needed to divide by a zero band entry."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InstabilityError(PentaspecError, ArithmeticError):
    """Backward recurrence did not stabilise before the start-index cap."""


class NumericalDomainError(PentaspecError, ArithmeticError):
    """Floating point produced a value outside its mathematical range."""


class ConvergenceError(PentaspecError, ArithmeticError):
    """Iterative eigenvalue algorithm ran out of iterations."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConsistencyError(PentaspecError):
    """Two routes that must agree did not, or a result violates a hypothesis."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class HypothesisError(PentaspecError):
    """Sufficient decay hypothesis not verified and not explicitly overridden."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict
