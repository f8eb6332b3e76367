"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`CTQWSearchError`. Errors that flag bad arguments also derive from
:class:`ValueError` so that generic callers can catch them the usual way.
"""


class CTQWSearchError(Exception):
    """Base class for all package errors."""


class DuplicateCoordinate(CTQWSearchError, ValueError):
    pass


class TargetNotInGraph(CTQWSearchError, LookupError):
    """The requested target site does not exist in the graph."""


class TargetOutOfRange(CTQWSearchError, IndexError):
    pass


class NotSymmetric(CTQWSearchError, ValueError):
    pass


class ConvergenceFailure(CTQWSearchError, ArithmeticError):
    pass


class NonFiniteInput(CTQWSearchError, ValueError):
    pass


class StepCountTooSmall(CTQWSearchError, ValueError):
    pass


class NegativeProbability(CTQWSearchError, ArithmeticError):
    """A propagated probability went negative beyond round-off."""


class DivisionDomain(CTQWSearchError, ZeroDivisionError):
    pass


class DegeneratePoints(CTQWSearchError, ValueError):
    pass


class ZeroState(CTQWSearchError, ValueError):
    pass


class EmptyGraph(CTQWSearchError, ValueError):
    pass
