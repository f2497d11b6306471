"""Exception hierarchy shared by all modules."""


class FastControlError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(FastControlError, ValueError):
    pass


class DomainError(FastControlError, ValueError):
    pass


class GapViolation(FastControlError, ValueError):
    """Generated eigenvalues are not strictly increasing / not separated."""


class UnknownIndex(FastControlError, KeyError):
    pass


class TruncationError(FastControlError):
    """Stored modes are too few for the requested product tolerance."""

    def __init__(self, message, required_index=None):
        super().__init__(message)
        self.required_index = required_index


class QuadratureNotConverged(FastControlError, ArithmeticError):
    pass


class SeriesNotConverged(FastControlError, ArithmeticError):
    pass


class DivisionDegenerate(FastControlError, ArithmeticError):
    pass


class TailNotBounded(FastControlError, ArithmeticError):
    pass


class PrecisionInsufficient(FastControlError, ArithmeticError):
    def __init__(self, message, condition=None, digits=None):
        super().__init__(message)
        self.condition = condition
        self.digits = digits


class GridMismatch(FastControlError, ValueError):
    pass
