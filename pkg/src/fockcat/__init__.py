"""Truncated Fock-space simulation of displacement-enhanced photon subtraction on split squeezed vacuum."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateStateError,
    DimensionError,
    FockcatError,
    NumericalHealthError,
    ParameterError,
    TruncationWarning,
)
from .fock import FockVector, PureTwoMode  # noqa: E402
from .states import SplitterParam, SqueezeParam  # noqa: E402

__all__ = [
    "DegenerateStateError",
    "DimensionError",
    "FockVector",
    "FockcatError",
    "NumericalHealthError",
    "ParameterError",
    "PureTwoMode",
    "SplitterParam",
    "SqueezeParam",
    "TruncationWarning",
]
