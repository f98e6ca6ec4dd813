"""Exception types shared across the package."""


class SphereCalibError(Exception):
    """Base class for all package errors."""


class DomainError(SphereCalibError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InvalidSpec(SphereCalibError, ValueError):
    """A problem instance violates one of its structural invariants."""


class SingularPoint(SphereCalibError):
    """Evaluation was requested at (or too close to) a singular point."""


class UnsupportedDimension(SphereCalibError, ValueError):
    """The construction is not defined for this submanifold dimension."""


class QuadratureFailure(SphereCalibError):
    """Adaptive quadrature exceeded its refinement budget."""


class StiffnessFailure(SphereCalibError):
    """The ODE integrator exceeded its step budget."""


class SignViolation(SphereCalibError):
    """A hypothesis of the divergence bound (h >= 0) fails."""
