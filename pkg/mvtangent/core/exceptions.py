"""
Library-specific exceptions to keep error handling consistent.
"""

class MVTangentError(Exception):
    """Base error."""
    pass

class DimensionMismatch(MVTangentError):
    """Raised when points, simplexes or maps live in different ambient dimensions."""
    pass

class DegenerateSimplex(MVTangentError):
    """Raised when vertices are affinely dependent or a frame is degenerate."""
    pass

class PointOutsideSimplex(MVTangentError):
    """Raised when an operation needs a point inside a simplex (or complex) and gets one outside."""
    pass

class NotAComplex(MVTangentError):
    """Raised when a set of simplexes violates the common-face condition."""

    def __init__(self, message: str, pair: tuple | None = None) -> None:
        super().__init__(message)
        self.pair = pair

class NotContained(MVTangentError):
    """Raised when a polyhedron is not contained in the support of a complex."""
    pass

class BlowupBudgetExceeded(MVTangentError):
    """Raised when a subdivision schedule exceeds the configured blow-up budget."""
    pass

class DivisibilityError(MVTangentError):
    """Raised when den(value(v)) does not divide den(v)."""

    def __init__(self, message: str, vertex: tuple | None = None) -> None:
        super().__init__(message)
        self.vertex = vertex

class NonRegularCarrier(MVTangentError):
    """Raised when a Z-map is asked to live on a non-regular triangulation."""
    pass

class NonIntegerPiece(MVTangentError):
    """Raised when an affine piece fails to have integer coefficients."""
    pass

class OutsideDomain(MVTangentError):
    """Raised when a point or set lies outside the domain of a map."""
    pass

class SpanMembershipError(MVTangentError):
    """Raised when x_i - x lies in the span of the current frame prefix."""

    def __init__(self, message: str, index: int | None = None, level: int | None = None) -> None:
        super().__init__(message)
        self.index = index
        self.level = level

class FrameError(MVTangentError):
    """Raised for malformed direction frames (zero vectors, non-orthogonal, too long)."""
    pass

class NoTangentSimplex(MVTangentError):
    """Raised when no generator of a polyhedron admits an (x,u)-simplex."""

    def __init__(self, message: str, level: int | None = None) -> None:
        super().__init__(message)
        self.level = level

class CertificateError(MVTangentError):
    """Raised for malformed tangent certificates."""
    pass

class WitnessError(MVTangentError):
    """Raised when a witness pair cannot be built or verified."""
    pass

class PullbackError(MVTangentError):
    """Raised when a tangent cannot be pulled back through a Z-map."""
    pass

class PreconditionError(MVTangentError):
    """Raised for generic precondition failures."""
    pass

class SchemaError(MVTangentError):
    """Raised when an input document does not match its schema."""

    def __init__(self, message: str, location: str | None = None) -> None:
        super().__init__(message if location is None else f"{location}: {message}")
        self.location = location
