"""Exception hierarchy shared by every module."""


class BilliardError(Exception):
    """Base class for all errors raised by olb."""


class InvalidPolygon(BilliardError, ValueError):
    pass


class PointInside(BilliardError):
    pass


class Singular(BilliardError):
    """The map is undefined at the point (it sits on a singular ray)."""


class OnSingularRay(Singular):
    pass


class EdgeAligned(BilliardError):
    """The point is collinear with a side, so a support line touches a whole edge."""


class NumericalDegeneracy(BilliardError):
    pass


class NoSolution(BilliardError):
    pass


class NotFound(BilliardError):
    pass


class Ambiguous(BilliardError):
    pass


class Collinear(BilliardError):
    pass


class IncompleteOrbit(BilliardError):
    pass


class RadiusTooSmall(BilliardError):
    pass


class OriginOutside(BilliardError):
    pass


class NearestPointOnEdge(BilliardError):
    pass


class DTooLarge(BilliardError, ValueError):
    pass


class Degenerate(BilliardError, ValueError):
    pass


class BracketFailure(BilliardError):
    pass


class TooSparse(BilliardError, ValueError):
    pass


class UnknownSymbol(BilliardError, KeyError):
    pass


class LabelMismatch(BilliardError):
    def __init__(self, index, expected, observed):
        self.index = index
        self.expected = expected
        self.observed = observed
        super().__init__(
            f"step {index}: expected piece {expected}, observed {observed}"
        )


class NoCandidate(BilliardError):
    pass
