"""Exception types shared across the package."""


class InfBernError(Exception):
    """Base class for all package errors."""


class DomainError(InfBernError, ValueError):
    """Invalid argument for a geometric or analytic operation."""


class EmptyInteriorError(InfBernError):
    """An erosion radius at or beyond the inradius left no interior."""


class GeometryInconsistencyError(InfBernError):
    """A computed profile or cross-check violates a convexity invariant."""


class ProfileResolutionError(InfBernError):
    """A root bracket could not be established on the sample grid."""


class NoRootError(InfBernError):
    """The critical-point equation has no root for the given weight."""


class SolverDivergenceError(InfBernError):
    """The grid solver failed to reach its tolerance within the sweep cap."""


class QuadratureError(InfBernError):
    """A quadrature produced a non-finite value."""


class NotApplicableError(InfBernError):
    """The requested correspondence is undefined below threshold."""


class HypothesisViolationError(InfBernError):
    """A routine was invoked outside the regime where its result means
    anything (e.g. a convergence sweep below the threshold weight)."""
