"""Exception and warning types raised across the package."""


class FockcatError(Exception):
    """Base class for all package errors."""


class DimensionError(FockcatError, ValueError):
    """Invalid truncation or mismatched operator/state dimensions."""


class ParameterError(FockcatError, ValueError):
    """Physical parameter outside its allowed range."""


class DegenerateStateError(FockcatError, ValueError):
    """Operation undefined for a zero-norm state or zero success probability."""


class NumericalHealthError(FockcatError, ArithmeticError):
    """Spectrum or truncation diagnostics breached their hard limits."""


class TruncationWarning(UserWarning):
    """Weight on the highest Fock row/column exceeds the configured tolerance."""
