"""Exception types shared across the package."""


class QBayesError(Exception):
    """Base class for all package errors."""


class NetworkError(QBayesError, ValueError):
    """Malformed or invalid network file, evidence or query spec."""


class ImpossibleEvidenceError(QBayesError):
    """Evidence has zero marginal probability."""


class SamplingBudgetError(QBayesError):
    """A sampler ran out of its draw or restart budget.

    ``partial`` holds whatever was collected before the budget ran out.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ResourceGuardError(QBayesError):
    """Requested size exceeds a configured resource guard."""


class CircuitError(QBayesError, ValueError):
    """Ill-formed gate or circuit."""


class MeasurementError(QBayesError):
    """Measurement selected a branch whose mass is numerically zero."""
