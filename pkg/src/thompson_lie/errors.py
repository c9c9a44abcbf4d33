"""Exception hierarchy shared by every module."""


class ThompsonLieError(Exception):
    """Base class for all package errors."""


class ConfigurationError(ThompsonLieError, ValueError):
    """Unsupported Lie type, rank, catalog key or optimizer setting."""


class UsageError(ThompsonLieError, ValueError):
    """Arguments violate an operation's precondition."""


class NumericalError(ThompsonLieError, ArithmeticError):
    """A floating point computation left its trusted regime.

    ``diagnostics`` carries whatever quantities triggered the failure
    (condition numbers, residuals) so callers can report them.
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class DiagnosticError(ThompsonLieError, RuntimeError):
    """An exact search (Weyl words, torus lifts) found no admissible candidate."""


class SingularGaugeError(NumericalError):
    """``1 + gamma# pi#`` is not invertible at the requested point."""
