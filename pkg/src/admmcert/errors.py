"""Exception types shared across the package."""


class AdmmCertError(Exception):
    """Base class for all package errors."""


class DomainError(AdmmCertError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class UnsupportedSizeError(DomainError):
    """Matrix dimension exceeds what the dense kernel supports."""


class ConvergenceError(AdmmCertError):
    """An iterative routine ran out of budget.

    Carries the best estimate found so far in ``best_estimate``.
    """

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


class UncertifiedError(AdmmCertError):
    """No rate could be certified; ``report`` holds the last solver report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NoCertifiableAlphaError(AdmmCertError):
    """Feasibility failed even at the smallest over-relaxation tested."""


class DivergenceError(AdmmCertError):
    """ADMM iterates blew up; ``iteration`` is where it was detected."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class SubproblemError(AdmmCertError):
    """A subproblem solver failed; ``iteration`` is the outer ADMM step."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class EstimationError(AdmmCertError):
    """A trace does not support the requested empirical estimate."""


class UnsupportedProblemError(AdmmCertError):
    """The operation needs problem structure this instance does not expose."""


class RankDeficiencyError(AdmmCertError):
    """A data block lost full column rank."""
