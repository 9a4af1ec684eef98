"""Exception hierarchy shared by the numerical modules."""


class HDelaunayError(Exception):
    """Base class for every error raised by this package."""


class DomainError(HDelaunayError, ValueError):
    """An input lies outside the model domain (x range, |y| <= 1, ...)."""


class UnsupportedSpaceError(HDelaunayError, ValueError):
    """The operation is not defined for the given (kappa, tau)."""


class SpecError(HDelaunayError, ValueError):
    """An inconsistent specification (step-family bands, delta condition...)."""


class IntegrationError(HDelaunayError, RuntimeError):
    """Step-size underflow or a geometry violation during integration."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class ClassificationError(HDelaunayError, RuntimeError):
    """An orbit did not reach the event its construction guarantees."""


class SeedError(HDelaunayError, ValueError):
    """A seed lies on the wrong side of a separatrix for the requested class."""


class AmbiguousSeedError(SeedError):
    """A seed is within tolerance of a separatrix value."""


class SearchFailure(HDelaunayError, RuntimeError):
    """A bracketing or bisection search did not converge.

    ``report`` carries whatever bracketing information was gathered.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


class ArcDegeneracyError(HDelaunayError, RuntimeError):
    """theta' <= 0 along a nodoid arc: the angle reparametrization breaks."""
