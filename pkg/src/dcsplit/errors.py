"""Exception types raised by dcsplit."""


class DCSplitError(Exception):
    """Base class for all library errors."""


class DegenerateDomain(DCSplitError):
    """Input points are affinely dependent or have mixed dimensions."""


class AnchorOutside(DCSplitError):
    """The supplied anchor is not strictly inside the domain."""


class OutsideDomain(DCSplitError):
    """A query point is not covered by any simplex of the mesh."""


class EvaluationFailure(DCSplitError):
    """A scalar field could not be evaluated."""


class NotConvexHinge(DCSplitError):
    """A wedge was requested for a hinge that is not convex."""


class DegenerateCurve(DCSplitError):
    """A curve has zero length or too few distinct points."""


class ConfigError(DCSplitError):
    """Invalid run configuration."""
