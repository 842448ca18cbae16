"""Exception types shared across the toolkit."""


class A2GError(Exception):
    """Base class for all toolkit errors."""


class CoincidentPoints(A2GError):
    """Two geographic points coincide where a direction/angle is required."""


class MalformedPattern(A2GError):
    """Antenna pattern data violates the grid contract."""


class DegenerateLink(A2GError):
    """Link geometry or gain is degenerate (zero distance, non-positive gain)."""


class EmptyInput(A2GError):
    """An operation received an empty collection."""


class NonPositivePower(A2GError):
    """Received power is not a positive linear quantity."""


class InsufficientSamples(A2GError):
    """Too few measurements for the requested operation."""


class RankDeficient(A2GError):
    """Least-squares geometry does not determine both coordinates."""


class DegenerateGeometry(A2GError):
    """All samples share one position; the system carries no information."""


class DegenerateTrajectory(A2GError):
    """Route has zero length."""


class SchemaError(A2GError):
    """A data file does not conform to its declared schema."""
