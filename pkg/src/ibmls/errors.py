"""Exception types shared across the package."""


class IBMLSError(Exception):
    """Base class for all package errors."""


class ConfigurationError(IBMLSError):
    """Invalid configuration value or unknown option."""


class NearSingularGram(IBMLSError):
    """Gram matrix of the constrained least-squares system is numerically singular.

    Carries the marker id (when known) so a failing marker can be located.
    """

    def __init__(self, message, marker_id=None):
        super().__init__(message)
        self.marker_id = marker_id


class SolverError(IBMLSError):
    """A linear or nonlinear solve failed to reach its tolerance."""
