"""Input and target states: squeezed vacuum, its split two-mode form, weak-squeezing expansions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .fock import DEFAULT_NMAX, FockVector, PureTwoMode, _check_splitter, _log_factorials


@dataclass(frozen=True)
class SqueezeParam:
    """Squeezing given as ``lam = tanh(s)``."""

    lam: float

    def __post_init__(self):
        if not 0.0 <= self.lam < 1.0:
            raise ParameterError(f"lambda must lie in [0, 1), got {self.lam}")

    @property
    def s(self) -> float:
        return math.atanh(self.lam)


@dataclass(frozen=True)
class SplitterParam:
    """Amplitude transmittance ``t`` and reflectance ``r`` of a lossless beam splitter."""

    t: float
    r: float

    def __post_init__(self):
        _check_splitter(self.t, self.r)

    @property
    def R(self) -> float:
        return self.r * self.r

    @classmethod
    def from_R(cls, R: float) -> "SplitterParam":
        if not 0.0 <= R <= 1.0:
            raise ParameterError(f"intensity reflectance must lie in [0, 1], got {R}")
        return cls(t=math.sqrt(1.0 - R), r=math.sqrt(R))

    @classmethod
    def balanced(cls) -> "SplitterParam":
        return cls.from_R(0.5)


def _lam(lam) -> float:
    return lam.lam if isinstance(lam, SqueezeParam) else SqueezeParam(float(lam)).lam


def smsv(lam: float | SqueezeParam, n_max: int = DEFAULT_NMAX) -> FockVector:
    """Single-mode squeezed vacuum truncated at ``n_max``; odd amplitudes are exactly zero."""
    lam = _lam(lam)
    if n_max < 2:
        raise DimensionError(f"n_max must be >= 2, got {n_max}")
    lf = _log_factorials(n_max)
    amps = np.zeros(n_max + 1, dtype=complex)
    pre = (1.0 - lam * lam) ** 0.25
    for n in range(n_max // 2 + 1):
        if lam == 0.0 and n > 0:
            break
        logc = 0.5 * lf[2 * n] - n * math.log(2.0) - lf[n]
        amps[2 * n] = pre * math.exp(logc) * lam**n
    return FockVector(amps)


def split_smsv(lam: float | SqueezeParam, splitter: SplitterParam, n_max: int = DEFAULT_NMAX) -> PureTwoMode:
    """Closed-form coefficients of squeezed vacuum mixed with vacuum on ``splitter``."""
    lam = _lam(lam)
    t, r = splitter.t, splitter.r
    lf = _log_factorials(2 * n_max)
    pre = (1.0 - lam * lam) ** 0.25
    c = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for m in range(n_max + 1):
        for n in range(m % 2, n_max + 1, 2):
            half = (m + n) // 2
            mag = math.exp(lf[m + n] - lf[half] - 0.5 * (lf[m] + lf[n]))
            c[m, n] = pre * (lam / 2.0) ** half * mag * t**m * r**n
    return PureTwoMode(c)


def weak_input(lam: float, splitter: SplitterParam, n_max: int = DEFAULT_NMAX) -> PureTwoMode:
    """Unnormalized four-term expansion ``|00> + lam r t |11> + lam/sqrt2 (t^2|20> + r^2|02>)``."""
    if n_max < 2:
        raise DimensionError(f"n_max must be >= 2, got {n_max}")
    t, r = splitter.t, splitter.r
    c = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    c[0, 0] = 1.0
    c[1, 1] = lam * r * t
    c[2, 0] = lam / math.sqrt(2.0) * t * t
    c[0, 2] = lam / math.sqrt(2.0) * r * r
    return PureTwoMode(c)


def qutrit_state(splitter: SplitterParam, n_max: int = DEFAULT_NMAX) -> PureTwoMode:
    """Two-photon target ``sqrt2 r t |11> + t^2 |20> + r^2 |02>`` (already normalized)."""
    if n_max < 2:
        raise DimensionError(f"n_max must be >= 2, got {n_max}")
    t, r = splitter.t, splitter.r
    c = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    c[1, 1] = math.sqrt(2.0) * r * t
    c[2, 0] = t * t
    c[0, 2] = r * r
    return PureTwoMode(c)


def single_photon_split(splitter: SplitterParam, n_max: int = DEFAULT_NMAX) -> PureTwoMode:
    """``t|1,0> + r|0,1>``, the weak-squeezing limit of single subtraction."""
    c = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    c[1, 0] = splitter.t
    c[0, 1] = splitter.r
    return PureTwoMode(c)
