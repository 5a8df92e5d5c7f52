"""Exception hierarchy shared by all modules."""


class SiegelError(Exception):
    """Base class for library errors."""


class ConductorMismatch(SiegelError, ValueError):
    """Arithmetic between cyclotomic numbers of different conductors."""


class CycDivisionByZero(SiegelError, ZeroDivisionError):
    """Inverse of the zero element of a cyclotomic field."""


class LevelMismatch(SiegelError, ValueError):
    """Series or group elements of different levels were combined."""


class HorizonError(SiegelError):
    """A comparison or inversion needs coefficients beyond the horizon."""


class OrderUndetermined(HorizonError):
    """Every coefficient below the horizon is zero."""


class BoundExceeded(SiegelError):
    """Group too large for subgroup enumeration."""


class PrecisionError(SiegelError):
    """Requested error bound is not reachable at the given precision."""


class SearchExhausted(SiegelError):
    """Parameter search ran out of budget; ``best`` holds the closest miss."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class PreconditionError(SiegelError, ValueError):
    """Operation called outside its domain (e.g. subgroup not in the Gamma^0 image)."""


class Inconclusive(SiegelError):
    """Horizon or precision exhausted before a verdict could be reached."""

    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context or {}
