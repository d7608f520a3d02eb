"""Exception hierarchy used across regimekit."""


class RegimeKitError(Exception):
    """Base class for all package errors."""


class LoadError(RegimeKitError, ValueError):
    """Malformed input file: bad period label, non-numeric cell, gap or duplicate."""


class DomainError(RegimeKitError, ValueError):
    """Input outside the domain of a transform (e.g. non-positive level)."""


class AlignmentError(RegimeKitError, ValueError):
    """Lagged series do not overlap on enough common periods."""


class SpecError(RegimeKitError, ValueError):
    """Inconsistent model specification or parameter layout."""


class DegenerateRegressionError(RegimeKitError, ValueError):
    """Design matrix is rank deficient (e.g. a zero-variance regressor)."""


class NonFiniteDensityError(RegimeKitError, FloatingPointError):
    """Observation density underflows in every regime.

    Attributes
    ----------
    t : int
        Zero-based row of the offending observation.
    """

    def __init__(self, t, message=None):
        self.t = int(t)
        super().__init__(message or f"non-finite density at observation {self.t}")


class EstimationError(RegimeKitError, RuntimeError):
    """No restart produced a finite log-likelihood."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []
