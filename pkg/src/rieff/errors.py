"""Named failures. Every numerical error derives from :class:`RieffError`."""


class RieffError(Exception):
    """Base class for numerical failures reported by the library."""


class DomainError(RieffError, ValueError):
    pass


class ParameterError(RieffError, ValueError):
    pass


class HyperbolicityLoss(RieffError):
    pass


class CoincidentStates(RieffError):
    pass


class NewtonDivergence(RieffError):
    pass


class StartDegenerate(RieffError):
    pass


class NotAnInflectionStop(RieffError):
    pass


class NonMonotoneCoordinate(RieffError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class TransitionError(RieffError):
    pass


class NoTangency(RieffError):
    pass


class NoIntersection(RieffError):
    pass


class MultipleIntersections(RieffError):
    pass


class CFLViolation(RieffError):
    pass


class PieceError(RieffError):
    """Wraps a failure raised while building one piece of an EFF."""

    def __init__(self, index, cause):
        super().__init__(f"piece {index}: {type(cause).__name__}: {cause}")
        self.index = index
        self.cause = cause
