"""Exception hierarchy shared by every module."""


class MetastabError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(MetastabError, ValueError):
    pass


class NonFiniteNumeric(MetastabError, ValueError):
    pass


class InvalidScenario(MetastabError, ValueError):
    pass


class HorizonExhausted(MetastabError):
    pass


class WitnessInvalid(MetastabError):
    """A rate witness fails its defining inequality.

    ``counterexample`` holds the offending ``(k, n)`` pair (or ``(m, k)`` for
    two-argument witnesses).
    """

    def __init__(self, message, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample


class BudgetExceeded(MetastabError):
    """An exact computation would exceed the configured bit or step budget."""

    def __init__(self, message, bits=None, depth=None):
        super().__init__(message)
        self.bits = bits
        self.depth = depth
        self.trace = []


class UnsupportedGrowth(MetastabError):
    """Magnitude propagation requested for a function without a growth class."""
