import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from baht.coupling import (
    alpha_aht1,
    alpha_exact,
    alpha_exact_auto,
    alpha_sweep,
    auto_epsilon,
    effective_hamiltonian,
    projection_components,
)
from baht.errors import LinearityError, UsageError
from baht.linalg import mat_exp_hermitian, spectral_norm, spin_operators
from baht.propagation import PerturbationModel, alternating_signs
from baht.sequences import builtin

from .oracles import random_hermitian

S = spin_operators(2)
DELTA = 1e6
H0 = DELTA * S.z
ROOT3 = 1 / np.sqrt(3)


@pytest.mark.parametrize("name,kind,expected", [
    ("ramsey", "dc", 1.0),
    ("wahuha", "dc", ROOT3),
    ("xy8", "ac_square", 1.0),
    ("droid_like", "ac_square", ROOT3),
    ("wahuha_echo", "ac_square", ROOT3),
    ("wahuha_echo", "dc", 0.0),
    ("xy8", "dc", 0.0),
])
def test_first_order_coupling(name, kind, expected):
    pert = PerturbationModel(kind, 1.0)
    assert alpha_aht1(builtin(name, 1e-7), pert).alpha == pytest.approx(expected, abs=1e-12)


def test_wahuha_echo_with_plain_alternation_cancels():
    pert = PerturbationModel.ac_square(1.0, sign_pattern=alternating_signs)
    assert alpha_aht1(builtin("wahuha_echo", 1e-7), pert).alpha == pytest.approx(0.0, abs=1e-15)


def test_projection_of_signal_onto_itself():
    comps = projection_components(S.z, S.z)
    assert comps == pytest.approx((0.0, 0.0, 1.0))
    mixed = projection_components((S.x + S.y + S.z) / 3, S.z)
    assert np.sqrt(sum(c * c for c in mixed)) == pytest.approx(ROOT3)
    with pytest.raises(UsageError):
        projection_components(S.z, np.zeros((2, 2)))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(1e-8, 1e-5))
def test_effective_hamiltonian_inverts_evolution(seed, t):
    h = random_hermitian(np.random.default_rng(seed), 2)
    h = h / spectral_norm(h) * 0.4 / t  # eigenphases within 0.8 pi
    u = mat_exp_hermitian(h, 2 * np.pi * t)
    assert np.max(np.abs(effective_hamiltonian(u, t) - h)) < 1e-9 / t


@pytest.mark.parametrize("t", [1e-9, 3e-7, 4e-6])
def test_ramsey_exact_is_one(t):
    res = alpha_exact_auto(builtin("ramsey", t), H0, PerturbationModel.dc(0.0))
    assert res.alpha == pytest.approx(1.0, abs=1e-9)


def test_exact_approaches_first_order_at_short_times():
    t = 1e-3 / DELTA
    for name, pert in [("wahuha", PerturbationModel.dc(0.0)),
                       ("droid_like", PerturbationModel.ac_square(0.0)),
                       ("xy8", PerturbationModel.ac_square(0.0))]:
        seq = builtin(name, 1e-7).with_period(t)
        assert alpha_exact_auto(seq, H0, pert).alpha == pytest.approx(
            alpha_aht1(seq, pert).alpha, abs=1e-4)


def test_exact_components_at_short_times():
    seq = builtin("wahuha", 1e-7).with_period(1e-9)
    comps = alpha_exact_auto(seq, H0, PerturbationModel.dc(0.0)).components
    assert comps == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-4)


def test_phase_precondition():
    seq = builtin("ramsey", 1e-6)
    with pytest.raises(UsageError):
        alpha_exact(seq, H0, PerturbationModel.dc(1e6))
    with pytest.raises(UsageError):
        alpha_exact(seq, H0, PerturbationModel.dc(0.0))


def test_linearity_guard():
    seq = builtin("wahuha", 1e-7).with_period(2e-6)
    pert = PerturbationModel.dc(0.1 / (2 * np.pi * 2e-6))
    with pytest.raises(LinearityError):
        alpha_exact(seq, H0, pert, tol=1e-12)


def test_auto_epsilon():
    assert 2 * np.pi * auto_epsilon(1e-6) * 1e-6 == pytest.approx(0.01)


def test_none_has_no_coupling():
    with pytest.raises(UsageError):
        alpha_aht1(builtin("ramsey", 1e-7), PerturbationModel())
    with pytest.raises(UsageError):
        alpha_sweep(builtin("ramsey", 1e-7), H0, PerturbationModel(), [1e-7])


def test_sweep_is_ordered_and_thread_independent(monkeypatch):
    grid = np.linspace(1e-7, 2e-6, 7)
    seq = builtin("wahuha", 1e-7)
    pert = PerturbationModel.dc(0.0)
    serial = alpha_sweep(seq, H0, pert, grid, threads=1)
    threaded = alpha_sweep(seq, H0, pert, grid, threads=3)
    assert [r.t for r in serial] == pytest.approx(list(grid))
    assert [r.alpha for r in serial] == [r.alpha for r in threaded]
    monkeypatch.setenv("BAHT_THREADS", "2")
    env = alpha_sweep(seq, H0, pert, grid)
    assert [r.alpha for r in env] == [r.alpha for r in serial]


def test_wahuha_dc_stays_between_bounds():
    grid = np.linspace(0.05, 4.0, 25) / DELTA
    res = alpha_sweep(builtin("wahuha", 1e-7), H0, PerturbationModel.dc(0.0), grid)
    alphas = [r.alpha for r in res]
    assert min(alphas) >= 1 / 3 - 1e-6
    assert max(alphas) <= ROOT3 + 1e-6
