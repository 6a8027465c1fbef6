class StiefelInjError(Exception):
    """Base class for errors raised by :mod:`stiefelinj`."""


class DimensionMismatch(StiefelInjError, ValueError):
    pass


class InvalidDims(StiefelInjError, ValueError):
    """(n, p) outside the range an operation is defined on."""


class ZeroTime(StiefelInjError, ValueError):
    pass


class NegativeEigenvalueAmbiguity(StiefelInjError, ArithmeticError):
    """The principal logarithm is not unique: an eigenvalue sits at -1."""


class DegenerateDraw(StiefelInjError, RuntimeError):
    pass
