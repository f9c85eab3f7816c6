import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.linalg import eigsh

from fockcat.entanglement import (
    DensityTwoMode,
    density_from_ensemble,
    entropy_of_entanglement,
    hermitian_eigvals,
    log_negativity,
    log_negativity_pure,
    partial_transpose,
    reduced_density,
    von_neumann_entropy,
)
from fockcat.errors import DegenerateStateError, NumericalHealthError
from fockcat.fock import PureTwoMode, apply_local, displacement_matrix, pad
from fockcat.states import SplitterParam, qutrit_state, single_photon_split, split_smsv
from fockcat.subtraction import Branch, BranchEnsemble, SubtractionParams, mixed_output_double, mixed_output_single
from oracles import binary_entropy

S2 = 1 / math.sqrt(2)
BAL = SplitterParam.balanced()


def bell(n_max=2):
    return PureTwoMode.basis(0, 1, n_max) * S2 + PureTwoMode.basis(1, 0, n_max) * S2


def test_entropy_examples():
    assert entropy_of_entanglement(bell()).value == pytest.approx(1.0, abs=1e-12)
    assert entropy_of_entanglement(qutrit_state(BAL)).value == pytest.approx(1.5, abs=1e-12)
    maxq = PureTwoMode.basis(0, 0, 3) + PureTwoMode.basis(1, 1, 3) + PureTwoMode.basis(2, 2, 3)
    assert entropy_of_entanglement(maxq).value == pytest.approx(math.log2(3), abs=1e-12)
    sp = SplitterParam.from_R(1 / 3)
    assert entropy_of_entanglement(single_photon_split(sp)).value == pytest.approx(binary_entropy(1 / 3), abs=1e-12)
    assert binary_entropy(1 / 3) == pytest.approx(0.9183, abs=1e-4)


def test_entropy_of_zero_state():
    with pytest.raises(DegenerateStateError):
        entropy_of_entanglement(PureTwoMode.zeros(2))


def test_entropy_product_state_is_zero():
    assert entropy_of_entanglement(PureTwoMode.basis(2, 0, 4)).value == 0.0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), d=st.integers(2, 8))
def test_reduced_entropies_agree(seed, d):
    rng = np.random.default_rng(seed)
    state = PureTwoMode(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    sa = von_neumann_entropy(reduced_density(state, "A"))
    sb = von_neumann_entropy(reduced_density(state, "B"))
    assert sa == pytest.approx(sb, abs=1e-8)
    assert sa == pytest.approx(entropy_of_entanglement(state).value, abs=1e-8)


def test_von_neumann_clipping_and_health():
    assert von_neumann_entropy(np.diag([1.0, -5e-10])) == 0.0
    with pytest.raises(NumericalHealthError):
        von_neumann_entropy(np.diag([1.0, -1e-6]))


def test_density_single_branch_is_projector():
    ens = BranchEnsemble((Branch((1,), bell() * 0.3, 1.0),))
    rho = density_from_ensemble(ens)
    assert np.allclose(rho.rho, DensityTwoMode.from_pure(bell()).rho)
    assert rho.trace() == pytest.approx(1.0, abs=1e-12)


def test_density_two_orthogonal_branches():
    a = PureTwoMode.basis(0, 1, 1)
    b = PureTwoMode.basis(1, 0, 1) * math.sqrt(2)
    ens = BranchEnsemble((Branch((1,), a, 1.0), Branch((2,), b, 0.5)))
    rho = density_from_ensemble(ens).rho
    expected = np.zeros((4, 4))
    expected[1, 1] = expected[2, 2] = 0.5
    assert np.allclose(rho, expected)


def test_density_zero_probability():
    ens = BranchEnsemble((Branch((1,), bell(), 0.0),))
    with pytest.raises(DegenerateStateError):
        density_from_ensemble(ens)


def test_realistic_single_density_trace_and_rank():
    ens = mixed_output_single(split_smsv(0.2, BAL), SubtractionParams.from_intensity(0.1))
    rho = density_from_ensemble(ens)
    assert rho.trace() == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(rho.rho, rho.rho.conj().T, atol=1e-14)
    ev = hermitian_eigvals(rho.rho)
    assert ev[0] > -1e-9
    assert (ev > 1e-14).sum() <= 10


def test_partial_transpose_properties():
    rng = np.random.default_rng(0)
    ra = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    ra = ra @ ra.conj().T
    rb = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rb = rb @ rb.conj().T
    prod = np.kron(ra, rb)
    assert np.allclose(partial_transpose(prod), np.kron(ra.T, rb))
    assert hermitian_eigvals(partial_transpose(prod))[0] > -1e-12
    x = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    assert np.array_equal(partial_transpose(partial_transpose(x)), x)


def test_partial_transpose_of_bell_projector():
    phi = PureTwoMode.basis(0, 0, 1) * S2 + PureTwoMode.basis(1, 1, 1) * S2
    ev = hermitian_eigvals(partial_transpose(DensityTwoMode.from_pure(phi)))
    assert ev[0] == pytest.approx(-0.5, abs=1e-12)


def test_log_negativity_examples():
    prod = DensityTwoMode.from_pure(PureTwoMode.basis(1, 2, 3))
    assert log_negativity(prod).value == 0.0
    assert log_negativity(DensityTwoMode.from_pure(bell())).value == pytest.approx(1.0, abs=1e-12)


def test_log_negativity_weak_squeezing_low_efficiency():
    ens = mixed_output_single(split_smsv(0.05, BAL), SubtractionParams.from_intensity(0.1, eta=0.1))
    assert log_negativity(density_from_ensemble(ens)).value > 0.9


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_pure_state_measures_match_schmidt_formulas(seed):
    rng = np.random.default_rng(seed)
    state = PureTwoMode(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    sv = np.linalg.svd(state.coeffs / np.linalg.norm(state.coeffs), compute_uv=False)
    en = log_negativity(DensityTwoMode.from_pure(state)).value
    assert en == pytest.approx(math.log2(sv.sum() ** 2), abs=1e-8)
    assert en == pytest.approx(log_negativity_pure(state), abs=1e-8)
    p = sv**2
    assert entropy_of_entanglement(state).value == pytest.approx(-(p * np.log2(p)).sum(), abs=1e-8)
    assert entropy_of_entanglement(state).value >= 0


def _displace_both(state: PureTwoMode, ga: complex, gb: complex, big: int) -> PureTwoMode:
    s = pad(state, big)
    return apply_local(s, displacement_matrix(ga, big + 1, big + 1), displacement_matrix(gb, big + 1, big + 1))


@pytest.mark.parametrize("ga,gb", [(0.2, -0.1), (0.1j, 0.15 - 0.1j), (-0.2, 0.2)])
def test_local_displacement_invariance_pure(ga, gb):
    state = qutrit_state(BAL, n_max=4)
    moved = _displace_both(state, ga, gb, 30)
    assert entropy_of_entanglement(moved).value == pytest.approx(1.5, abs=1e-6)


@pytest.mark.parametrize("ga,gb", [(0.2, -0.1), (0.1j, 0.15 - 0.1j)])
def test_local_displacement_invariance_mixture(ga, gb):
    c = split_smsv(0.1, BAL, 6)
    ens = mixed_output_double(c, SubtractionParams.from_intensity(0.1, alpha=0.2, beta=-0.2, k_max=3))
    e0 = log_negativity(density_from_ensemble(ens)).value
    moved = BranchEnsemble(tuple(Branch(b.label, _displace_both(b.state, ga, gb, 24), b.herald_weight)
                                 for b in ens.branches))
    assert log_negativity(density_from_ensemble(moved)).value == pytest.approx(e0, abs=1e-6)


@pytest.mark.parametrize("side", [9, 40, 121])
def test_eigensolver_against_lanczos(side):
    rng = np.random.default_rng(side)
    h = rng.normal(size=(side, side)) + 1j * rng.normal(size=(side, side))
    h = (h + h.conj().T) / 2
    ours = hermitian_eigvals(h)
    lo = side // 2
    ref_lo = np.sort(eigsh(h, k=lo, which="SA", tol=0, return_eigenvectors=False))
    ref_hi = np.sort(eigsh(h, k=side - lo, which="LA", tol=0, return_eigenvectors=False))
    ref = np.concatenate([ref_lo, ref_hi])
    scale = np.abs(ours).max()
    assert np.abs(ours - ref).max() / scale < 1e-9
