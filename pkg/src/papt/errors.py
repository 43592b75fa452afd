"""Exception hierarchy shared across the package."""


class PaptError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(PaptError, ValueError):
    """An input violates a documented precondition."""


class DegenerateZeroOrderError(PaptError, ArithmeticError):
    """The zero-order operator is singular on the complement of the reference."""

    def __init__(self, message, order=None):
        if order is not None:
            message = f"order {order}: {message}"
        super().__init__(message)
        self.order = order


class ConvergenceError(PaptError, RuntimeError):
    def __init__(self, message, last_change=None):
        super().__init__(message)
        self.last_change = last_change


class FCIDumpError(PaptError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class QuasiDegenerateError(PaptError, ArithmeticError):
    """Fock spectrum too close to degenerate for first-order amplitudes."""


class RankDeficiencyError(PaptError, ArithmeticError):
    """More redundant directions in the similarity system than expected."""


class InconsistentSystemError(PaptError, ArithmeticError):
    """The similarity system has no solution to within tolerance."""


class SizeLimitError(PaptError, ValueError):
    """Determinant space exceeds the configured cap."""
