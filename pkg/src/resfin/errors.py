"""Exception hierarchy shared by all modules."""


class ResfinError(Exception):
    """Base class for every error raised by this package."""


class NonBijective(ResfinError):
    def __init__(self, index):
        super().__init__(f"generator table {index} is not a permutation")
        self.index = index


class InvalidPoint(ResfinError):
    pass


class ResolutionOverflow(ResfinError):
    pass


class Mismatch(ResfinError):
    pass


class NonEvaluable(ResfinError):
    pass


class NonInvertible(ResfinError):
    pass


class NoChain(ResfinError):
    pass


class SizeOverflow(ResfinError):
    pass


class Infinite(ResfinError):
    """The finite quotient group is infinite (determinant zero)."""


class NotInvertible(ResfinError):
    pass


class Inconclusive(ResfinError):
    pass


class ContextOverflow(ResfinError):
    pass


class StaleContext(ResfinError):
    pass


class NoPositiveRationalSolution(ResfinError):
    pass


class NotFixed(ResfinError):
    pass


class OrbitLeavesPolytope(ResfinError):
    pass


class SpectralGap(ResfinError):
    pass


class DeltaExceeded(ResfinError):
    pass


class CascadeExceeded(ResfinError):
    pass


class Singular(ResfinError):
    pass


class TraceMismatch(ResfinError):
    def __init__(self, index, detail=""):
        msg = f"trace mismatch at index {index}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.index = index


class ThresholdExceeded(ResfinError):
    pass


class PlacementError(ResfinError):
    pass


class HypothesisError(ResfinError):
    pass


class ParseError(ResfinError):
    pass


class UnsupportedVersion(ResfinError):
    pass


class MetricError(ResfinError):
    """A distance table violates a metric axiom."""

    def __init__(self, message, triple=None):
        super().__init__(message)
        self.triple = triple


class NotRepresentable(ResfinError):
    """The image of a point is not representable in the descriptor."""


class BoundViolation(ResfinError):
    """A bound asserted at run time failed numerically."""
