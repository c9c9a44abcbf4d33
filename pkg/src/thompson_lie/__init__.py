"""Exact root data, real forms, Iwasawa geometry, polygon feasibility and
Poisson structures for the Thompson problem on complex semisimple groups."""

__version__ = "0.1.0"

from .errors import (ConfigurationError, DiagnosticError, NumericalError, SingularGaugeError,
                     ThompsonLieError, UsageError)

__all__ = ["__version__", "ThompsonLieError", "ConfigurationError", "UsageError",
           "NumericalError", "DiagnosticError", "SingularGaugeError"]
