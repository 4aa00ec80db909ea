"""Exception and warning types shared across the package."""


class DispersimError(Exception):
    """Base class for all package errors."""


class GeometryInvalid(DispersimError):
    """Obstacle touches the cell boundary, exits it, or disconnects the fluid."""


class MeshingFailed(DispersimError):
    """Mesh generation produced degenerate or non-conforming elements."""


class DimensionMismatch(DispersimError):
    """Coefficient or field shapes are inconsistent with the mesh/space."""


class MissingPairs(DispersimError):
    """Periodic identification requested but vertex/edge partners are absent."""


class DoubleConstraint(DispersimError):
    """A zero-mean constraint row was attached twice to the same system."""


class SingularMatrix(DispersimError):
    """Sparse factorization broke down."""


class ResidualTooLarge(DispersimError):
    """Direct solve did not reach the required relative residual."""


class EnergyBoundViolated(DispersimError):
    """Corrector gradient exceeded its a-priori energy bound (assembly bug)."""


class CoercivityViolated(DispersimError):
    """Supplied coercivity constant exceeds the sampled minimum eigenvalue of D."""


class PositivityViolated(DispersimError):
    """A stored dispersion tensor lost positive definiteness of its symmetric part."""


class NonPositiveTensor(DispersimError):
    """Tensor provider returned a matrix with non-positive-definite symmetric part."""


class SubdomainMisaligned(DispersimError):
    """Mass-indicator subdomain is not contained in the macro domain."""


class ConfigInvalid(DispersimError):
    """Scenario validation failure; carries the offending field name."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class PecletWarning(UserWarning):
    """Element Peclet number exceeds 1: cell problem is convection dominated."""


class OutOfRangeWarning(UserWarning):
    """Drift parameter fell outside the tabulated sweep range and was clamped."""


class NoObstacleWarning(UserWarning):
    """Stokes solve on an obstacle-free cell: no-slip set is empty."""


class MaximumBoundWarning(UserWarning):
    """A trajectory iterate exceeded the a-priori L-infinity bound allowance."""
