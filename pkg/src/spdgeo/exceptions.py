"""Exception hierarchy shared by every module of the package."""


class SpdGeoError(Exception):
    """Base class for all errors raised by spdgeo."""


class NotSymmetricError(SpdGeoError, ValueError):
    """Input is not a square finite real matrix."""


class NotSPDError(SpdGeoError, ValueError):
    """Matrix fails the positive definiteness guard."""


class DomainError(SpdGeoError, ValueError):
    """Argument lies outside the domain of a map (eigenvalue, time, ...)."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class GeodesicBoundaryError(DomainError):
    """Numerical geodesic left the SPD cone."""

    def __init__(self, message, last_t):
        super().__init__(message)
        self.last_t = last_t


class ConvergenceError(SpdGeoError, RuntimeError):
    """An iterative linear algebra routine did not converge."""


class InvalidSpecError(SpdGeoError, ValueError):
    """A metric specification violates its defining conditions."""


class UnsupportedOperationError(SpdGeoError, NotImplementedError):
    """Operation has no known closed form for the requested metric."""
