import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcauchy.algebra import (
    DegenerateMomentumError,
    MomentumPoint,
    dirac_hamiltonian,
    fw_diagonalizer_batch,
    fw_diagonalizer_massive,
    fw_diagonalizer_massless,
    gamma_matrices,
    helicity_diagonalizer,
    slash,
    spin_dot,
)

I4 = np.eye(4)


def fro(a):
    return np.linalg.norm(a)


momenta = st.tuples(*[st.floats(-50, 50) for _ in range(3)]).filter(lambda v: np.linalg.norm(v) > 1e-3)


@pytest.mark.parametrize("rep", ["dirac", "chiral"])
def test_clifford_relations(rep):
    g = gamma_matrices(rep)
    eta = np.diag([1.0, -1.0, -1.0, -1.0])
    for mu in range(4):
        for nu in range(4):
            anti = g[mu] @ g[nu] + g[nu] @ g[mu]
            assert fro(anti - 2 * eta[mu, nu] * I4) < 1e-15


def test_gamma0_squared():
    g0 = gamma_matrices()[0]
    assert fro(g0 @ g0 - I4) == 0


def test_hamiltonian_spectrum_on_axis():
    # dense Hermitian eigensolver as oracle
    h = dirac_hamiltonian([0.0, 0.0, 1.0])
    assert fro(h - h.conj().T) < 1e-15
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(h)), [-1, -1, 1, 1], atol=1e-14)


def test_hamiltonian_at_zero_momentum():
    assert fro(dirac_hamiltonian([0.0, 0.0, 0.0])) == 0


def test_massless_diagonalizer_identities():
    g0 = gamma_matrices()[0]
    p = np.array([0.0, 0.0, 2.0])
    t = fw_diagonalizer_massless(p)
    assert fro(t @ t - I4) <= 1e-12
    assert fro(t @ (g0 * 2.0) @ t - g0 @ slash(p)) <= 1e-12


def test_massless_diagonalizer_spectrum():
    t = np.asarray(fw_diagonalizer_massless(5 * np.ones(3) / np.sqrt(3)))
    ev = np.linalg.eigvalsh(t)
    assert np.all(np.min(np.abs(ev[:, None] - np.array([1.0, -1.0])), axis=1) < 1e-12)


def test_massless_diagonalizer_rejects_zero():
    with pytest.raises(DegenerateMomentumError):
        fw_diagonalizer_massless([0.0, 0.0, 0.0])
    with pytest.raises(DegenerateMomentumError):
        MomentumPoint([0.0, 0.0, 0.0]).direction


def test_massive_diagonalizer_at_rest_is_gamma0():
    g0 = gamma_matrices()[0]
    assert fro(np.asarray(fw_diagonalizer_massive([0.0, 0.0, 0.0], 1.0)) - g0) < 1e-15


def test_massive_diagonalizer_on_axis():
    g0 = gamma_matrices()[0]
    p = np.array([0.0, 0.0, 1.0])
    t = fw_diagonalizer_massive(p, 1.0)
    assert fro(t @ (g0 * np.sqrt(2.0)) @ t - (g0 @ slash(p) + g0)) <= 1e-12


def test_massive_diagonalizer_continuous_in_mass():
    p = [0.0, 0.0, 1.0]
    d = fro(np.asarray(fw_diagonalizer_massive(p, 1e-8)) - np.asarray(fw_diagonalizer_massless(p)))
    assert d <= 1e-7


@settings(max_examples=60, deadline=None)
@given(momenta, st.floats(0.0, 20.0), st.sampled_from(["dirac", "chiral"]))
def test_diagonalizer_properties(p, m, rep):
    p = np.array(p)
    g0 = gamma_matrices(rep)[0]
    t = fw_diagonalizer_batch(p[None], m, rep)[0]
    e = np.sqrt(m * m + p @ p)
    scale = max(1.0, e)
    assert fro(t @ t - I4) <= 1e-12
    assert fro(t - t.conj().T) <= 1e-12
    assert fro(t @ (g0 * e) @ t - dirac_hamiltonian(p, m, rep)) <= 1e-12 * scale


def test_spin_dot_spectrum():
    np.testing.assert_allclose(np.linalg.eigvalsh(spin_dot([0.0, 0.0, 1.0])), [-1, 0, 1], atol=1e-15)


def test_helicity_diagonalizer_example():
    p = np.array([3.0, 4.0, 0.0])
    q = np.asarray(helicity_diagonalizer(p))
    assert fro(q.conj().T @ q - np.eye(3)) <= 1e-12
    assert fro(q @ spin_dot(p) @ q.conj().T - np.diag([5.0, -5.0, 0.0])) <= 1e-12
    # oracle: Hermitian eigensolver gives the same spectrum
    np.testing.assert_allclose(np.linalg.eigvalsh(spin_dot(p)), [-5, 0, 5], atol=1e-13)


@pytest.mark.parametrize("axis", range(3))
def test_helicity_on_seed_axis(axis):
    p = np.zeros(3)
    p[axis] = 2.5
    q = np.asarray(helicity_diagonalizer(p))
    assert fro(q @ spin_dot(p) @ q.conj().T - np.diag([2.5, -2.5, 0.0])) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(momenta)
def test_helicity_properties(p):
    p = np.array(p)
    rho = np.linalg.norm(p)
    q = np.asarray(helicity_diagonalizer(p))
    assert fro(q.conj().T @ q - np.eye(3)) <= 1e-12
    assert fro(q @ spin_dot(p) @ q.conj().T - np.diag([rho, -rho, 0.0])) <= 1e-12 * max(1, rho)


def test_helicity_rejects_zero():
    with pytest.raises(DegenerateMomentumError):
        helicity_diagonalizer([0.0, 0.0, 0.0])


def test_momentum_validation():
    with pytest.raises(ValueError):
        fw_diagonalizer_massless([1.0, 2.0])
    with pytest.raises(ValueError):
        fw_diagonalizer_massless([np.nan, 0.0, 1.0])
    with pytest.raises(ValueError):
        fw_diagonalizer_batch([[1.0, 0.0, 0.0]], -1.0)
