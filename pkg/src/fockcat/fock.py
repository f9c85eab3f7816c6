"""Truncated Fock-space containers and elementary single-/two-mode operators.

Single-mode operators are plain complex ``numpy`` arrays acting on column
vectors of Fock amplitudes; a two-mode pure state is stored as its
coefficient matrix ``C[m, n]`` for ``|m>_A |n>_B``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateStateError, DimensionError, ParameterError, TruncationWarning

DEFAULT_NMAX = 10
TAIL_TOLERANCE = 1e-6


@lru_cache(maxsize=None)
def _log_factorials(n: int) -> np.ndarray:
    out = gammaln(np.arange(n + 1) + 1.0)
    out.setflags(write=False)
    return out


def log_factorial(n: int) -> float:
    return float(_log_factorials(max(n, 0))[n])


def _frozen(a, dtype=complex) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FockVector:
    """Single-mode pure state, amplitudes on ``|0>..|n_max>``."""

    amps: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amps)
        if amps.ndim != 1 or amps.size < 1:
            raise DimensionError(f"amplitudes must be a non-empty vector, got shape {amps.shape}")
        object.__setattr__(self, "amps", amps)

    @property
    def n_max(self) -> int:
        return self.amps.size - 1

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    @classmethod
    def basis(cls, n: int, n_max: int) -> "FockVector":
        if not 0 <= n <= n_max:
            raise DimensionError(f"Fock number {n} outside [0, {n_max}]")
        amps = np.zeros(n_max + 1, dtype=complex)
        amps[n] = 1.0
        return cls(amps)


@dataclass(frozen=True)
class PureTwoMode:
    """Two-mode pure state (possibly unnormalized) as a square matrix ``C[m, n]``.

    The squared Frobenius norm of a heralded branch is the probability of
    the heralding event.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = _frozen(self.coeffs)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 1:
            raise DimensionError(f"coefficient matrix must be square, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_max(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    def ket(self) -> np.ndarray:
        """Flat state vector with index ``m * (n_max + 1) + n``."""
        return self.coeffs.reshape(-1)

    def __add__(self, other: "PureTwoMode") -> "PureTwoMode":
        return PureTwoMode(self.coeffs + other.coeffs)

    def __mul__(self, factor: complex) -> "PureTwoMode":
        return PureTwoMode(self.coeffs * factor)

    __rmul__ = __mul__

    @classmethod
    def basis(cls, m: int, n: int, n_max: int) -> "PureTwoMode":
        if not (0 <= m <= n_max and 0 <= n <= n_max):
            raise DimensionError(f"|{m},{n}> outside truncation n_max={n_max}")
        c = np.zeros((n_max + 1, n_max + 1), dtype=complex)
        c[m, n] = 1.0
        return cls(c)

    @classmethod
    def zeros(cls, n_max: int) -> "PureTwoMode":
        return cls(np.zeros((n_max + 1, n_max + 1), dtype=complex))

    @classmethod
    def product(cls, a: FockVector, b: FockVector) -> "PureTwoMode":
        if a.n_max != b.n_max:
            raise DimensionError("product state needs equal truncations")
        return cls(np.outer(a.amps, b.amps))


@dataclass(frozen=True)
class TruncationReport:
    tail_weight: float
    norm2: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.tail_weight <= self.tolerance * max(self.norm2, np.finfo(float).tiny)

    @property
    def relative_tail(self) -> float:
        return self.tail_weight / self.norm2 if self.norm2 > 0 else 0.0


def annihilation_matrix(n_max: int) -> np.ndarray:
    """Matrix of the annihilation operator, ``<n-1|a|n> = sqrt(n)``."""
    if n_max < 1:
        raise DimensionError(f"n_max must be >= 1, got {n_max}")
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), 1).astype(complex)


def displacement_matrix(alpha: complex, d_out: int, d_in: int) -> np.ndarray:
    """Number-basis matrix elements ``<m|D(alpha)|n>`` for ``m < d_out``, ``n < d_in``.

    Uses the finite double-factorial sum, evaluated term by term with
    factorials taken from a log table. Rectangular shapes are allowed so
    that rows can extend above the input truncation.
    """
    if d_out < 1 or d_in < 1:
        raise DimensionError(f"dimensions must be >= 1, got ({d_out}, {d_in})")
    alpha = complex(alpha)
    lf = _log_factorials(max(d_out, d_in) + 1)
    m = np.arange(d_out)[:, None, None]
    n = np.arange(d_in)[None, :, None]
    k = np.arange(d_out)[None, None, :]
    j = n - m + k  # power of -conj(alpha)
    valid = (k <= m) & (j >= 0)
    ks = np.where(valid, k, 0)
    js = np.where(valid, j, 0)
    mk = np.where(valid, m - k, 0)
    logmag = 0.5 * (lf[m] + lf[n]) - lf[ks] - lf[mk] - lf[js]
    terms = np.exp(logmag) * np.power(alpha, ks) * np.power(-alpha.conjugate(), js)
    terms = np.where(valid, terms, 0.0)
    return math.exp(-0.5 * abs(alpha) ** 2) * terms.sum(axis=2)


def _check_splitter(t: float, r: float, tol: float = 1e-12) -> None:
    if t < 0 or r < 0 or abs(t * t + r * r - 1.0) > tol:
        raise ParameterError(f"beam splitter needs t, r >= 0 with t^2 + r^2 = 1, got t={t}, r={r}")


def beamsplitter_apply(state: PureTwoMode, t: float, r: float) -> PureTwoMode:
    """Mix modes A and B on a beam splitter.

    Convention: ``a^dag -> t a^dag + r b^dag`` and ``b^dag -> t b^dag - r a^dag``.
    Output components above ``n_max`` are dropped.
    """
    _check_splitter(t, r)
    d = state.dim
    lf = _log_factorials(2 * d)
    out = np.zeros((d, d), dtype=complex)
    c = state.coeffs
    for m, n in zip(*np.nonzero(c)):
        amp = c[m, n]
        for j in range(m + 1):
            # j photons of the a^dag factor stay in A
            wa = math.comb(m, j) * t**j * r ** (m - j)
            if wa == 0.0:
                continue
            for i in range(n + 1):
                # i photons of the b^dag factor stay in B
                wb = math.comb(n, i) * t**i * (-r) ** (n - i)
                if wb == 0.0:
                    continue
                p, q = j + n - i, m - j + i
                if p >= d or q >= d:
                    continue
                scale = math.exp(0.5 * (lf[p] + lf[q] - lf[m] - lf[n]))
                out[p, q] += amp * wa * wb * scale
    return PureTwoMode(out)


def apply_local(state: PureTwoMode, op_a: np.ndarray | None = None, op_b: np.ndarray | None = None) -> PureTwoMode:
    """Apply ``op_a (x) op_b`` to a two-mode state: ``C -> op_a @ C @ op_b.T``.

    ``None`` stands for the identity. Both operators must be square with the
    state's dimension so the result stays a square coefficient matrix.
    """
    c = state.coeffs
    for name, op in (("op_a", op_a), ("op_b", op_b)):
        if op is not None and np.shape(op) != (state.dim, state.dim):
            raise DimensionError(f"{name} has shape {np.shape(op)}, state side is {state.dim}")
    if op_a is not None:
        c = op_a @ c
    if op_b is not None:
        c = c @ np.transpose(op_b)
    return PureTwoMode(c)


def norm2(state: PureTwoMode | FockVector) -> float:
    return state.norm2() if isinstance(state, FockVector) else float(np.vdot(state.coeffs, state.coeffs).real)


def normalize(state: PureTwoMode) -> PureTwoMode:
    nrm = norm2(state)
    if nrm <= 0.0:
        raise DegenerateStateError("cannot normalize a zero state")
    return PureTwoMode(state.coeffs / math.sqrt(nrm))


def truncation_report(state: PureTwoMode, tol: float = TAIL_TOLERANCE, warn: bool = True) -> TruncationReport:
    """Weight on the highest row ``m = n_max`` and column ``n = n_max``."""
    w = np.abs(state.coeffs) ** 2
    tail = float(w[-1, :].sum() + w[:-1, -1].sum())
    report = TruncationReport(tail_weight=tail, norm2=float(w.sum()), tolerance=tol)
    if warn and not report.ok:
        warnings.warn(
            f"truncation tail {report.relative_tail:.3e} of norm exceeds {tol:.1e} at n_max={state.n_max}",
            TruncationWarning,
            stacklevel=2,
        )
    return report


def pad(state: PureTwoMode, n_max: int) -> PureTwoMode:
    """Embed a state into a larger truncation with zeros."""
    if n_max < state.n_max:
        raise DimensionError(f"cannot pad n_max={state.n_max} down to {n_max}")
    c = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    c[: state.dim, : state.dim] = state.coeffs
    return PureTwoMode(c)


def crop(state: PureTwoMode, n_max: int) -> PureTwoMode:
    if n_max > state.n_max:
        raise DimensionError(f"cannot crop n_max={state.n_max} up to {n_max}")
    return PureTwoMode(state.coeffs[: n_max + 1, : n_max + 1])
