"""Exception hierarchy shared by every module."""


class OnewayError(Exception):
    """Base class for all errors raised by the package."""


class InvalidStateError(OnewayError, ValueError):
    """A state violates normalization, hermiticity or positivity."""


class InvalidOperatorError(OnewayError, ValueError):
    """A matrix that should be unitary or Hermitian is not."""


class RegisterError(OnewayError, ValueError):
    """Unknown, duplicated or otherwise inconsistent subsystem labels."""


class IntegrityError(OnewayError, ArithmeticError):
    """An entropic quantity fell outside its physically allowed range."""


class CapacityError(OnewayError):
    """The doubled Hilbert-space dimension exceeds the configured budget."""


class SpecError(OnewayError):
    """Diagnostic for a malformed process-specification file.

    Carries a 1-based ``line`` and ``column`` so messages read like
    ``line 3, column 7: undeclared system 'C'``.
    """

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        if line:
            super().__init__(f"line {line}, column {column}: {message}")
        else:
            super().__init__(message)
