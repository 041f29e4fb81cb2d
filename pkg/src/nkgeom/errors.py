"""Exception types raised by the geometry engine."""


class GeometryError(ValueError):
    """Base class for all engine errors."""


class JetDimensionError(GeometryError):
    """Two jets with different chart dimensions were combined."""


class JetDomainError(GeometryError):
    """An elementary function was evaluated outside its domain."""

    def __init__(self, func, detail=""):
        self.func = func
        msg = f"{func}: argument outside domain"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class JetOrderError(GeometryError):
    """A second-order quantity was requested from a first-order jet."""


class DomainViolation(GeometryError):
    """A field was evaluated at a chart point outside its declared domain."""


class SingularMetricError(GeometryError):
    """The metric is singular or not positive definite at a point."""


class DegreeError(GeometryError):
    """Incompatible form degrees."""


class OrientationError(GeometryError):
    """An orientation-dependent operation was requested on an unoriented metric."""


class StructureError(GeometryError):
    """An almost Hermitian or G-structure failed one of its defining invariants."""


class UnknownFixtureError(KeyError):
    """Lookup of a fixture name that is not registered."""
