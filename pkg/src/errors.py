"""
Errors - Exception hierarchy shared by all co-simulation modules.
"""


class CosimError(Exception):
    """Base class for framework errors."""


class ShapeError(CosimError, ValueError):
    """Invalid shape kind, coordinate, order or interval."""


class SignalError(CosimError, ValueError):
    """Invalid exchange history or realization."""


class CausalityError(SignalError):
    """A realization would use samples from after its interval start."""


class LedgerError(CosimError, ValueError):
    """Invalid correction policy or ledger entry."""


class ModelError(CosimError, ValueError):
    """Invalid model parameters, identifier or state dimension."""


class ConfigError(CosimError, ValueError):
    """Invalid run or study configuration."""


class NumericalFailure(CosimError, RuntimeError):
    """Micro integration failed or produced non-finite values."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message if t is None else f"{message} (t={t:.17g})")
        self.t = t


class QuadratureError(NumericalFailure):
    """Quadrature met non-finite samples."""
