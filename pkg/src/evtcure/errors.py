"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 2); numerical
breakdowns derive from :class:`EstimationError` (CLI exit code 3).
"""


class InputError(ValueError):
    """Invalid user-supplied data or configuration."""


class EstimationError(ArithmeticError):
    """An estimator could not be evaluated on otherwise valid input."""


class EmptySample(InputError):
    pass


class NegativeTime(InputError):
    pass


class NonFiniteTime(InputError):
    pass


class EndpointNotAbove(InputError):
    """An observed time is at or beyond the supplied right endpoint."""


class PointBeyondData(InputError):
    pass


class DegenerateDenominator(EstimationError):
    """The second difference F(y^2 t) - 2F(y t) + F(t) vanishes."""


class QuadratureFailure(EstimationError):
    pass


class MalformedHeader(InputError):
    pass


class BadRow(InputError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class EmptyGroup(InputError):
    pass


class BadConfig(InputError):
    def __init__(self, key: str, reason: str = ""):
        msg = f"bad config key {key!r}" + (f": {reason}" if reason else "")
        super().__init__(msg)
        self.key = key
