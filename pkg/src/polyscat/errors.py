"""Exception hierarchy shared across the package."""


class PolyscatError(Exception):
    """Base class for all package errors."""


class DomainError(PolyscatError):
    """Argument outside the mathematical domain of an operation."""


class OrderCapExceeded(DomainError):
    """Requested order exceeds the configured recurrence cap."""


class InvalidPolarization(DomainError):
    """Plane-wave polarization not orthogonal to the propagation direction."""


class EvalAtSource(DomainError):
    """Field evaluation requested at (or too close to) a source point."""


class EvalInsideBall(DomainError):
    """Exterior-series evaluation requested inside the scatterer ball."""


class RuleMismatch(PolyscatError):
    """Two sampled fields do not share the same sphere quadrature rule."""


class DegreeTooLow(PolyscatError):
    """Quadrature rule cannot resolve the requested modal order."""


class InteriorEigenvalueNear(PolyscatError):
    """k^2 is numerically too close to an interior eigenvalue of the test ball."""


class SingularParameterCombination(PolyscatError):
    """Parameter combination at which a formula is singular (e.g. k = lambda)."""


class QuadratureFailure(PolyscatError):
    """1D quadrature failed to reach the requested tolerance."""


class IllConditioned(PolyscatError):
    """Linear solve did not reach the target residual after regularization."""


class NonConvexInput(DomainError):
    """Input polyhedron is not convex (or not watertight)."""
