"""Exception types raised by the library."""


class BpbError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(BpbError, ValueError):
    pass


class InvalidPolytope(BpbError, ValueError):
    """Vertex data that is not a symmetric, irredundant polytope."""


class DegeneratePolytope(InvalidPolytope):
    """Vertex data that does not span the ambient space."""


class InvalidFace(BpbError, ValueError):
    pass


class ZeroVector(BpbError, ValueError):
    pass


class UnknownSpace(BpbError, KeyError):
    pass


class BadParameter(BpbError, ValueError):
    pass


class UnsupportedSpace(BpbError, TypeError):
    pass


class OutOfDomain(BpbError, ValueError):
    pass


class BudgetTooSmall(BpbError, RuntimeError):
    pass


class MeshTooCoarse(BpbError, RuntimeError):
    """The certified bound does not improve on the universal cap."""


class SpecParseError(BpbError, ValueError):
    pass
