"""Exception hierarchy shared by the geometry modules and the CLI."""


class ShilovError(Exception):
    """Base class; the CLI maps subclasses onto exit codes."""


class UndefinedInputError(ShilovError, ValueError):
    pass


class DomainError(ShilovError, ValueError):
    """A point or parameter lies outside the set an operation is defined on."""


class ChartOverflow(ShilovError):
    """The point is not transverse to the point at infinity of the chart."""


class DegeneratePairError(ShilovError, ValueError):
    pass


class NotConjugateDirection(ShilovError, ValueError):
    pass


class NotConjugate(ShilovError, ValueError):
    def __init__(self, message, link=None):
        super().__init__(message)
        self.link = link


class OnPhotonError(ShilovError, ValueError):
    pass


class NonTransverseQuadruple(ShilovError, ZeroDivisionError):
    pass


class BudgetExceeded(ShilovError, RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
