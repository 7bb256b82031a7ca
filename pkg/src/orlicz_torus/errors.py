"""Exception hierarchy shared by all modules."""


class OrliczTorusError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(OrliczTorusError, ValueError):
    pass


class OverflowDomain(OrliczTorusError, ValueError):
    pass


class NoConvergence(OrliczTorusError, RuntimeError):
    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class NotSorted(OrliczTorusError, ValueError):
    pass


class GridMismatch(OrliczTorusError, ValueError):
    pass


class TruncationTooSmall(OrliczTorusError, ValueError):
    pass


class FamilyTooLarge(OrliczTorusError, ValueError):
    pass


class CapExceeded(OrliczTorusError, ValueError):
    pass


class MembershipFailed(OrliczTorusError):
    """Raised when the truncated symbol is not certified to lie in the ideal.

    The failing membership verdict is kept on ``self.verdict``.
    """

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class NotSelfAdjoint(OrliczTorusError, ValueError):
    pass


class NotPSD(OrliczTorusError, ValueError):
    pass


class SingularOperator(OrliczTorusError, ArithmeticError):
    pass


class EmptyPool(OrliczTorusError, ValueError):
    pass


class ConfigError(OrliczTorusError, ValueError):
    pass
