"""Entanglement measures: entropy of entanglement for pure states, logarithmic negativity for mixtures.

All logarithms are base 2. Density matrices use the flat index
``m * (n_max + 1) + n`` for ``|m>_A |n>_B``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateStateError, DimensionError, NumericalHealthError
from .fock import PureTwoMode, norm2
from .subtraction import BranchEnsemble

NEGATIVE_CLIP = 1e-9


@dataclass(frozen=True)
class DensityTwoMode:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        side = rho.shape[0]
        d = int(round(np.sqrt(side)))
        if rho.ndim != 2 or rho.shape != (side, side) or d * d != side:
            raise DimensionError(f"density matrix must be square with side (n_max+1)^2, got {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        """Single-mode dimension ``n_max + 1``."""
        return int(round(np.sqrt(self.rho.shape[0])))

    @property
    def n_max(self) -> int:
        return self.dim - 1

    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    @classmethod
    def from_pure(cls, state: PureTwoMode) -> "DensityTwoMode":
        v = state.ket() / np.sqrt(norm2(state))
        return cls(np.outer(v, v.conj()))


@dataclass(frozen=True)
class EntanglementResult:
    value: float
    kind: str
    diagnostics: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value


def hermitian_eigvals(h: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix (LAPACK ``heevd`` via numpy)."""
    return np.linalg.eigvalsh(h)


def _entropy_from_probs(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(max(-(p * np.log2(p)).sum(), 0.0))


def schmidt_coefficients(state: PureTwoMode) -> np.ndarray:
    """Singular values of the normalized coefficient matrix, descending."""
    nrm = norm2(state)
    if nrm <= 0.0:
        raise DegenerateStateError("zero state has no Schmidt decomposition")
    return np.linalg.svd(state.coeffs / np.sqrt(nrm), compute_uv=False)


def entropy_of_entanglement(state: PureTwoMode) -> EntanglementResult:
    sv = schmidt_coefficients(state)
    p = sv**2
    value = _entropy_from_probs(p)
    return EntanglementResult(value, "entropy", {"schmidt_rank": int((p > 1e-14).sum()), "spectrum_tail": float(p[-1])})


def reduced_density(state: PureTwoMode, keep: str = "A") -> np.ndarray:
    """Reduced state of mode ``keep`` from a (normalized internally) pure two-mode state."""
    nrm = norm2(state)
    if nrm <= 0.0:
        raise DegenerateStateError("zero state")
    c = state.coeffs / np.sqrt(nrm)
    if keep == "A":
        return c @ c.conj().T
    if keep == "B":
        return c.T @ c.conj()
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Base-2 entropy; eigenvalues in ``[-1e-9, 0)`` are clipped, anything lower is an error."""
    ev = hermitian_eigvals(rho)
    if ev[0] < -NEGATIVE_CLIP:
        raise NumericalHealthError(f"density matrix has eigenvalue {ev[0]:.3e}")
    return _entropy_from_probs(np.clip(ev, 0.0, None))


def density_from_ensemble(ens: BranchEnsemble) -> DensityTwoMode:
    """Materialize ``(1/P) sum_k w_k |psi_k><psi_k|`` as a full density matrix."""
    if ens.success_prob <= 0.0:
        raise DegenerateStateError("ensemble has zero success probability")
    kets = np.array([np.sqrt(b.herald_weight) * b.state.ket() for b in ens.branches])
    rho = kets.T @ kets.conj() / ens.success_prob
    return DensityTwoMode(0.5 * (rho + rho.conj().T))


def partial_transpose(rho: DensityTwoMode | np.ndarray) -> np.ndarray:
    """Transpose with respect to mode A: ``<m,n|X|m',n'> -> <m',n|X|m,n'>``."""
    r = rho.rho if isinstance(rho, DensityTwoMode) else np.asarray(rho)
    d = int(round(np.sqrt(r.shape[0])))
    return r.reshape(d, d, d, d).transpose(2, 1, 0, 3).reshape(d * d, d * d)


def log_negativity(rho: DensityTwoMode) -> EntanglementResult:
    """``log2`` of the trace norm of the partial transpose, clipped at zero."""
    ev = hermitian_eigvals(partial_transpose(rho))
    trace_norm = float(np.abs(ev).sum())
    value = max(float(np.log2(trace_norm)), 0.0) if trace_norm > 0 else 0.0
    neg_mass = float(-ev[ev < 0].sum())
    return EntanglementResult(value, "log_negativity", {"trace_norm": trace_norm, "negative_mass": neg_mass,
                                                         "min_eigenvalue": float(ev[0])})


def log_negativity_pure(state: PureTwoMode) -> float:
    """Closed form for pure states: ``log2((sum_i sigma_i)^2)``."""
    return float(2.0 * np.log2(schmidt_coefficients(state).sum()))
