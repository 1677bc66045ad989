"""Exception types shared across the package."""


class OneBitError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(OneBitError, ValueError):
    pass


class InfeasiblePointError(OneBitError, ValueError):
    """Raised when an iterate leaves the open box ``|M_ij| < alpha``."""


class LineSearchStall(OneBitError, RuntimeError):
    """Backtracking shrank the step below its floor.

    The last feasible iterate is kept on ``self.factors``.
    """

    def __init__(self, message, factors=None):
        super().__init__(message)
        self.factors = factors


class CVDegenerateError(OneBitError, RuntimeError):
    pass


class BoundUndefinedError(OneBitError, ValueError):
    pass


class ParseError(OneBitError, ValueError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number
