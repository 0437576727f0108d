import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from baht.errors import BranchCutError, DimensionError, RoleViolationError, StateNormError
from baht.linalg import (
    PAULI_X,
    PAULI_Z,
    check_hermitian,
    check_unitary,
    commutator,
    diagonalize_unitary,
    eigenphases,
    hs_inner,
    is_hermitian,
    mat_exp_hermitian,
    pauli_components,
    plus_state,
    principal_log_unitary,
    spectral_norm,
    spin_operators,
    state_fidelity,
)

from .oracles import brute_spectral_norm, random_hermitian, taylor_expm

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 4)


@pytest.mark.parametrize("dim", [2, 3, 4, 5])
def test_spin_algebra(dim):
    s = spin_operators(dim)
    j = (dim - 1) / 2
    assert np.allclose(commutator(s.x, s.y), 1j * s.z, atol=1e-14)
    assert np.allclose(commutator(s.y, s.z), 1j * s.x, atol=1e-14)
    casimir = s.x @ s.x + s.y @ s.y + s.z @ s.z
    assert np.allclose(casimir, j * (j + 1) * np.eye(dim), atol=1e-13)


def test_spin_half_is_half_pauli():
    s = spin_operators(2)
    assert np.array_equal(2 * s.x, PAULI_X)
    assert np.array_equal(2 * s.z, PAULI_Z)


def test_spin_operators_are_read_only():
    with pytest.raises(ValueError):
        spin_operators(2).x[0, 0] = 1


def test_bad_dimension():
    with pytest.raises(DimensionError):
        spin_operators(1)
    with pytest.raises(DimensionError):
        check_hermitian(np.eye(3)[:2])


@settings(max_examples=60, deadline=None)
@given(seed=seeds, dim=dims, scale=st.floats(1e-6, 30.0))
def test_exponential_matches_taylor_oracle(seed, dim, scale):
    h = random_hermitian(np.random.default_rng(seed), dim, scale)
    u = mat_exp_hermitian(h, 0.7)
    ref = taylor_expm(-0.7j * h)
    assert np.max(np.abs(u - ref)) < 1e-12 * max(1.0, scale)
    assert np.max(np.abs(u.conj().T @ u - np.eye(dim))) < 1e-12


def test_exponential_of_zero_is_identity():
    assert np.array_equal(mat_exp_hermitian(np.zeros((2, 2))), np.eye(2))


def test_pi_rotation_about_z_on_plus_x_gives_zero_fidelity():
    # exp(-i pi S_z) sends |+x> to |-x>
    sz = spin_operators(2).z
    u = mat_exp_hermitian(sz, np.pi)
    assert state_fidelity(plus_state("x"), np.eye(2), u) == pytest.approx(0.0, abs=1e-15)


def test_full_turn_is_minus_identity_and_keeps_fidelity():
    sz = spin_operators(2).z
    u = mat_exp_hermitian(sz, 2 * np.pi)
    assert np.allclose(u, -np.eye(2), atol=1e-15)
    assert state_fidelity(plus_state("x"), np.eye(2), u) == pytest.approx(1.0, abs=1e-15)


def test_fidelity_identical_operators():
    u = mat_exp_hermitian(random_hermitian(np.random.default_rng(3), 2))
    assert state_fidelity(plus_state("y"), u, u) == pytest.approx(1.0, abs=1e-14)


def test_fidelity_rejects_unnormalised_state():
    with pytest.raises(StateNormError):
        state_fidelity(np.array([1.0, 1.0]), np.eye(2), np.eye(2))


@settings(max_examples=60, deadline=None)
@given(seed=seeds, dim=dims, scale=st.floats(1e-7, 2.5))
def test_principal_log_round_trip(seed, dim, scale):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, dim)
    h = h / spectral_norm(h) * scale  # eigenphases stay inside (-pi, pi)
    u = mat_exp_hermitian(h)
    omega = principal_log_unitary(u)
    assert is_hermitian(omega)
    assert np.max(np.abs(omega - h)) < 1e-12
    assert np.max(np.abs(mat_exp_hermitian(omega) - u)) < 1e-13


@settings(max_examples=30, deadline=None)
@given(seed=seeds, dim=dims)
def test_principal_log_agrees_with_scipy_logm(seed, dim):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, dim)
    u = mat_exp_hermitian(h / spectral_norm(h) * 2.0)
    ref = 1j * scipy.linalg.logm(u)
    assert np.max(np.abs(principal_log_unitary(u) - ref)) < 1e-10


def test_principal_log_keeps_precision_near_identity():
    h = 1e-9 * spin_operators(2).x
    omega = principal_log_unitary(mat_exp_hermitian(h))
    assert np.max(np.abs(omega - h)) < 1e-24


def test_branch_cut_is_reported():
    u = mat_exp_hermitian(PAULI_Z, np.pi - 1e-8)
    with pytest.raises(BranchCutError):
        principal_log_unitary(u)
    # same rotation just outside the guard is accepted
    principal_log_unitary(mat_exp_hermitian(PAULI_Z, np.pi - 1e-5))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, dim=dims)
def test_diagonalize_unitary_reconstructs(seed, dim):
    u = mat_exp_hermitian(random_hermitian(np.random.default_rng(seed), dim))
    p, d = diagonalize_unitary(u)
    assert np.allclose(p @ np.diag(d) @ p.conj().T, u, atol=1e-12)
    assert np.allclose(p.conj().T @ p, np.eye(dim), atol=1e-12)


def test_eigenphases_of_diagonal():
    u = np.diag(np.exp(1j * np.array([0.3, -1.2])))
    assert sorted(eigenphases(u)) == pytest.approx([-1.2, 0.3], abs=1e-14)


def test_role_checks_are_relative():
    h = 1e7 * random_hermitian(np.random.default_rng(0), 3)
    noisy = h + 1e-7 * np.triu(np.ones((3, 3)), 1)
    check_hermitian(noisy)
    with pytest.raises(RoleViolationError):
        check_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(RoleViolationError):
        check_unitary(2 * np.eye(2))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, dim=dims)
def test_spectral_norm_against_brute_force(seed, dim):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    assert spectral_norm(a) == pytest.approx(brute_spectral_norm(a), rel=1e-12)
    assert spectral_norm(np.zeros((dim, dim))) == 0.0


def test_hs_inner_and_pauli_components():
    s = spin_operators(2)
    assert hs_inner(s.x, s.x) == pytest.approx(0.5)
    assert hs_inner(s.x, s.y) == pytest.approx(0.0)
    a0, vec = pauli_components(0.3 * np.eye(2) + 0.1 * PAULI_X - 0.4 * PAULI_Z)
    assert a0 == pytest.approx(0.3)
    assert np.allclose(vec, [0.1, 0.0, -0.4])


@pytest.mark.parametrize("axis", ["x", "y", "z"])
@pytest.mark.parametrize("dim", [2, 3])
def test_plus_state_is_top_eigenvector(axis, dim):
    s = spin_operators(dim)
    op = {"x": s.x, "y": s.y, "z": s.z}[axis]
    psi = plus_state(axis, dim)
    j = (dim - 1) / 2
    assert np.allclose(op @ psi, j * psi, atol=1e-13)
