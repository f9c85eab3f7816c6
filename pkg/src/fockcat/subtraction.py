"""Photon subtraction: ideal displaced-annihilation filters and the tap-off/on-off-detector model.

Realistic branches are kept in the displaced frame, i.e. the coherent
displacement applied before the tap-off splitter is not undone unless
``undisplace=True`` is requested. The inverse displacement is a local
unitary shared by every branch, so entanglement is unaffected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError
from .fock import PureTwoMode, annihilation_matrix, apply_local, displacement_matrix, norm2

Label = tuple[int, ...]


@dataclass(frozen=True)
class SubtractionParams:
    """Tap-off splitter, detector and displacement settings.

    ``r_s_b``/``eta_b`` override the values used for mode B in the double
    scheme; by default both modes share ``r_s`` and ``eta``.
    """

    r_s: float
    eta: float = 1.0
    k_max: int | None = None
    alpha: complex = 0.0
    beta: complex = 0.0
    t_s: float | None = None
    r_s_b: float | None = None
    eta_b: float | None = None

    def __post_init__(self):
        if self.t_s is None:
            if not 0.0 <= self.r_s <= 1.0:
                raise ParameterError(f"r_s must lie in [0, 1], got {self.r_s}")
            object.__setattr__(self, "t_s", math.sqrt(1.0 - self.r_s**2))
        _check_tap(self.t_s, self.r_s)
        if self.r_s_b is not None:
            _check_tap(math.sqrt(max(1.0 - self.r_s_b**2, 0.0)), self.r_s_b)
        for name in ("eta", "eta_b"):
            val = getattr(self, name)
            if val is not None and not 0.0 <= val <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {val}")
        if self.k_max is not None and self.k_max < 1:
            raise ParameterError(f"k_max must be >= 1, got {self.k_max}")

    @classmethod
    def from_intensity(cls, R_s: float, **kwargs) -> "SubtractionParams":
        if not 0.0 <= R_s <= 1.0:
            raise ParameterError(f"R_s must lie in [0, 1], got {R_s}")
        return cls(r_s=math.sqrt(R_s), **kwargs)

    @property
    def tap_b(self) -> tuple[float, float]:
        if self.r_s_b is None:
            return self.t_s, self.r_s
        return math.sqrt(1.0 - self.r_s_b**2), self.r_s_b

    @property
    def efficiency_b(self) -> float:
        return self.eta if self.eta_b is None else self.eta_b


def _check_tap(t_s: float, r_s: float) -> None:
    if t_s < 0 or r_s < 0 or abs(t_s * t_s + r_s * r_s - 1.0) > 1e-12:
        raise ParameterError(f"tap-off splitter needs t_s^2 + r_s^2 = 1, got t_s={t_s}, r_s={r_s}")


def herald_weight(eta: float, k: int) -> float:
    """Click probability of an on/off detector hit by ``k`` photons."""
    return 1.0 - (1.0 - eta) ** k


@dataclass(frozen=True)
class Branch:
    label: Label
    state: PureTwoMode
    herald_weight: float

    @property
    def probability(self) -> float:
        return norm2(self.state)


@dataclass(frozen=True)
class BranchEnsemble:
    """Heralded mixture as an explicit list of weighted unnormalized pure branches."""

    branches: tuple[Branch, ...]
    success_prob: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "success_prob", float(sum(b.herald_weight * b.probability for b in self.branches)))

    @property
    def n_max(self) -> int:
        return self.branches[0].state.n_max

    def branch_table(self) -> list[dict]:
        return [
            {"label": b.label, "norm2": b.probability, "herald_weight": b.herald_weight,
             "contribution": b.herald_weight * b.probability}
            for b in self.branches
        ]


# --- ideal filters ---------------------------------------------------------

def displaced_annihilation(alpha: complex, n_max: int) -> np.ndarray:
    return annihilation_matrix(n_max) + complex(alpha) * np.eye(n_max + 1)


def filter_single_ideal(state: PureTwoMode, alpha: complex = 0.0) -> PureTwoMode:
    """Unnormalized ``(a + alpha) (x) 1`` image of ``state``."""
    if state.dim < 2:
        raise DimensionError("state side must be >= 2")
    return apply_local(state, displaced_annihilation(alpha, state.n_max), None)


def filter_double_ideal(state: PureTwoMode, alpha: complex = 0.0, beta: complex = 0.0) -> PureTwoMode:
    """Unnormalized ``(a + alpha) (x) (b + beta)`` image of ``state``."""
    if state.dim < 2:
        raise DimensionError("state side must be >= 2")
    n = state.n_max
    return apply_local(state, displaced_annihilation(alpha, n), displaced_annihilation(beta, n))


# --- realistic tap-off model -----------------------------------------------

def _row_factors(n_max: int, k: int, t_s: float, r_s: float) -> np.ndarray:
    m = np.arange(n_max + 1)
    binom = np.array([math.comb(int(x) + k, k) for x in m], dtype=float)
    return np.sqrt(binom) * t_s**m * r_s**k


def subtract_branch_single(state: PureTwoMode, alpha: complex, k: int, t_s: float, r_s: float) -> PureTwoMode:
    """Branch where exactly ``k`` photons reach the detector after ``D_A(alpha)``.

    ``B[m, n] = sqrt(C(m+k, k)) t_s^m r_s^k sum_a D[m+k, a](alpha) C[a, n]``; its
    squared norm is the probability of that event.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    return _branch_a(state, alpha, k, t_s, r_s)


def _branch_a(state: PureTwoMode, alpha: complex, k: int, t_s: float, r_s: float) -> PureTwoMode:
    _check_tap(t_s, r_s)
    n = state.n_max
    disp = displacement_matrix(alpha, n + k + 1, n + 1) @ state.coeffs
    return PureTwoMode(_row_factors(n, k, t_s, r_s)[:, None] * disp[k:, :])


def no_click_branch(state: PureTwoMode, alpha: complex, t_s: float, r_s: float) -> PureTwoMode:
    """The ``k = 0`` event: nothing reflected onto the detector."""
    return _branch_a(state, alpha, 0, t_s, r_s)


def subtract_branch_double(
    state: PureTwoMode,
    alpha: complex,
    beta: complex,
    k: int,
    l: int,
    t_s: float,
    r_s: float,
    t_s_b: float | None = None,
    r_s_b: float | None = None,
) -> PureTwoMode:
    """Branch with ``k`` photons tapped from A and ``l`` from B, both after local displacements."""
    if k < 1 or l < 1:
        raise ParameterError(f"k and l must be >= 1, got k={k}, l={l}")
    if r_s_b is None:
        t_s_b, r_s_b = t_s, r_s
    _check_tap(t_s, r_s)
    _check_tap(t_s_b, r_s_b)
    n = state.n_max
    da = displacement_matrix(alpha, n + k + 1, n + 1)
    db = displacement_matrix(beta, n + l + 1, n + 1)
    return _double_from(da, db, state.coeffs, n, k, l, t_s, r_s, t_s_b, r_s_b)


def _double_from(da, db, c, n, k, l, t_s, r_s, t_s_b, r_s_b) -> PureTwoMode:
    disp = da[k : k + n + 1] @ c @ db[l : l + n + 1].T
    fa = _row_factors(n, k, t_s, r_s)
    fb = _row_factors(n, l, t_s_b, r_s_b)
    return PureTwoMode(fa[:, None] * disp * fb[None, :])


def _undisplace_ops(params: SubtractionParams, n_max: int, double: bool):
    op_a = displacement_matrix(-params.t_s * complex(params.alpha), n_max + 1, n_max + 1)
    op_b = None
    if double:
        op_b = displacement_matrix(-params.tap_b[0] * complex(params.beta), n_max + 1, n_max + 1)
    return op_a, op_b


def mixed_output_single(state: PureTwoMode, params: SubtractionParams, undisplace: bool = False) -> BranchEnsemble:
    """Heralded mixture for subtraction on mode A with an on/off detector.

    Branch ``k`` carries herald weight ``1 - (1 - eta)^k``; ``success_prob`` is
    the weighted sum of branch norms.
    """
    k_max = params.k_max or state.n_max
    ops = _undisplace_ops(params, state.n_max, double=False) if undisplace else None
    branches = []
    for k in range(1, k_max + 1):
        b = subtract_branch_single(state, params.alpha, k, params.t_s, params.r_s)
        if ops is not None:
            b = apply_local(b, *ops)
        branches.append(Branch((k,), b, herald_weight(params.eta, k)))
    return BranchEnsemble(tuple(branches))


def mixed_output_double(state: PureTwoMode, params: SubtractionParams, undisplace: bool = False) -> BranchEnsemble:
    """Heralded mixture for subtraction on both modes; branches over ``(k, l)`` in ``[1, k_max]^2``."""
    k_max = params.k_max or state.n_max
    n = state.n_max
    t_b, r_b = params.tap_b
    eta_b = params.efficiency_b
    da = displacement_matrix(params.alpha, n + k_max + 1, n + 1)
    db = displacement_matrix(params.beta, n + k_max + 1, n + 1)
    ops = _undisplace_ops(params, n, double=True) if undisplace else None
    branches = []
    for k in range(1, k_max + 1):
        for l in range(1, k_max + 1):
            b = _double_from(da, db, state.coeffs, n, k, l, params.t_s, params.r_s, t_b, r_b)
            if ops is not None:
                b = apply_local(b, *ops)
            w = herald_weight(params.eta, k) * herald_weight(eta_b, l)
            branches.append(Branch((k, l), b, w))
    return BranchEnsemble(tuple(branches))


def filter_operator(k: int, alpha: complex, t_s: float, r_s: float, n_max: int) -> np.ndarray:
    """Closed-form filter for displacement, tap-off and ``k``-photon detection, undisplaced frame.

    ``(r_s^k / sqrt(k!)) exp(-r_s^2 |alpha|^2 / 2) t_s^n exp(-r_s^2 conj(alpha) a) (a + alpha)^k``
    """
    if k < 0:
        raise ParameterError(f"k must be >= 0, got {k}")
    _check_tap(t_s, r_s)
    alpha = complex(alpha)
    a = annihilation_matrix(n_max)
    atten = np.diag(t_s ** np.arange(n_max + 1)).astype(complex)
    # a is nilpotent, so the exponential series terminates at order n_max
    x = -(r_s**2) * alpha.conjugate() * a
    expo = np.eye(n_max + 1, dtype=complex)
    term = np.eye(n_max + 1, dtype=complex)
    for j in range(1, n_max + 1):
        term = term @ x / j
        expo = expo + term
    lowered = np.linalg.matrix_power(a + alpha * np.eye(n_max + 1), k)
    pre = r_s**k / math.sqrt(math.factorial(k)) * math.exp(-0.5 * r_s**2 * abs(alpha) ** 2)
    return pre * atten @ expo @ lowered
