import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from qcauchy import algebra
from qcauchy.functionals import ORACLE_CONFIG_3D, qc3d_apply, qc3d_massive_apply
from qcauchy.quad import oscillatory_halfline
from qcauchy.harness import standard_bump
from qcauchy.propagators import (
    PropagatorSpec,
    classical_limit_scan,
    dirac_full_momentum_apply,
    dirac_fw_apply,
    dirac_symbol,
    dirac_symbol_fw,
    fw_equivalence,
    massive_kernel_3d,
    maxwell_full_momentum_apply,
    maxwell_fw_apply,
    maxwell_fw_symbol,
    maxwell_symbol,
    maxwell_symbol_fw,
)
from qcauchy.testfn import BumpFunction

momenta = st.tuples(*[st.floats(-20, 20) for _ in range(3)]).filter(lambda v: np.linalg.norm(v) > 1e-2)


@pytest.fixture(scope="module")
def bump():
    return standard_bump(3)


# pointwise symbols

@settings(max_examples=40, deadline=None)
@given(momenta, st.floats(0.0, 5.0), st.floats(0.05, 3.0), st.sampled_from([1, -1]))
def test_dirac_symbol_is_matrix_exponential(p, m, t, s):
    p = np.array(p)
    h = algebra.dirac_hamiltonian(p, m)
    ref = expm(1j * s * t * h)
    assert np.linalg.norm(dirac_symbol(p[None], t, m, time_sign=s)[0] - ref) <= 1e-12
    assert np.linalg.norm(dirac_symbol_fw(p[None], t, m, time_sign=s)[0] - ref) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(momenta, st.floats(0.05, 3.0))
def test_maxwell_symbol_is_matrix_exponential(p, t):
    p = np.array(p)
    ref = expm(-1j * t * algebra.spin_dot(p))
    assert np.linalg.norm(maxwell_symbol(p[None], t)[0] - ref) <= 1e-12
    assert np.linalg.norm(maxwell_symbol_fw(p[None], t)[0] - ref) <= 1e-12


def test_symbols_compose():
    p = np.random.default_rng(3).normal(size=(20, 3)) * 4
    for m in (0.0, 1.5):
        a = dirac_symbol(p, 0.4, m) @ dirac_symbol(p, 0.9, m)
        assert np.max(np.abs(a - dirac_symbol(p, 1.3, m))) <= 1e-12
    b = maxwell_symbol(p, 0.4) @ maxwell_symbol(p, 0.9)
    assert np.max(np.abs(b - maxwell_symbol(p, 1.3))) <= 1e-12


def test_maxwell_helicity_phase():
    p = np.array([[0.0, 0.0, 1.0]])
    t = 0.8
    v = np.array([1.0, 1j, 0.0]) / math.sqrt(2)
    # (S, p) v = +rho v, so exp(-i t (S, p)) v = exp(-i t rho) v
    np.testing.assert_allclose(algebra.spin_dot(p[0]) @ v, v, atol=1e-15)
    np.testing.assert_allclose(maxwell_symbol(p, t)[0] @ v, np.exp(-1j * t) * v, atol=1e-15)


def test_maxwell_longitudinal_mode_frozen():
    p = np.array([[1.0, -2.0, 0.5]])
    np.testing.assert_allclose(maxwell_symbol(p, 1.7)[0] @ p[0], p[0], atol=1e-14)


def test_maxwell_fw_symbol_ordering():
    d = maxwell_fw_symbol(np.array([[0.0, 3.0, 4.0]]), 1.0)[0]
    np.testing.assert_allclose(np.diag(d), [np.exp(-5j), np.exp(5j), 1.0])


# FW-diagonal forms from position space

def test_dirac_fw_massless_entries(bump):
    spec = PropagatorSpec("dirac_massless", 1.0)
    res = dirac_fw_apply(spec, bump)
    c = qc3d_apply(1.0, bump).value
    assert res.entries[0, 0] == c
    np.testing.assert_allclose(np.diag(res.entries), [c, c, np.conj(c), np.conj(c)], atol=1e-15)
    assert abs(np.trace(res.entries) - 4 * c.real) <= 1e-14
    off = res.entries - np.diag(np.diag(res.entries))
    assert np.all(off == 0)


def test_dirac_fw_massive_entries(bump):
    res = dirac_fw_apply(PropagatorSpec("dirac_massive", 1.0, 1.0), bump)
    c = qc3d_massive_apply(1.0, 1.0, bump).value
    np.testing.assert_allclose(np.diag(res.entries), [c, c, np.conj(c), np.conj(c)], atol=1e-15)


def test_maxwell_fw_entries(bump):
    res = maxwell_fw_apply(1.0, bump)
    c = qc3d_apply(1.0, bump).value
    assert res.entries[2, 2] == bump(np.zeros((1, 3)))[0]
    assert res.entries[1, 1] == c
    assert res.entries[0, 0] == np.conj(c)


# full momentum-side matrices

@pytest.fixture(scope="module")
def dirac_massive_full(bump):
    return dirac_full_momentum_apply(PropagatorSpec("dirac_massive", 1.0, 1.0, form="full"), bump)


def test_full_dirac_radial_bump_is_diagonal_and_matches_fw(bump, dirac_massive_full):
    res = dirac_massive_full
    assert res.converged
    c = qc3d_massive_apply(1.0, 1.0, bump).value
    # for a radial bump the odd part of exp(itH) integrates to zero, leaving
    # <cos tE> I + i <m sin(tE) / E> gamma0; the cosine part is Re C
    d = np.diag(res.entries)
    np.testing.assert_allclose(d.real, c.real, atol=1e-10)
    np.testing.assert_allclose(d.imag * np.array([1, 1, -1, -1]), d[0].imag, atol=1e-12)
    # independent scalar oracle for <m sin(tE) / E>
    t, m = 1.0, 1.0

    def g(rho):
        e = np.sqrt(m * m + rho * rho)
        return rho * rho * (m / e) * bump.spectral_mean(rho) * np.exp(1j * t * (e - rho)) / (2 * math.pi ** 2)

    ref = oscillatory_halfline(g, t, "exp", ORACLE_CONFIG_3D, scale=math.pi / bump.radius).value.imag
    assert abs(d[0].imag - ref) <= 1e-9
    off = res.entries - np.diag(np.diag(res.entries))
    assert np.max(np.abs(off)) <= 1e-10


def test_full_dirac_conjugate_time_is_adjoint(bump, dirac_massive_full):
    spec = PropagatorSpec("dirac_massive", 1.0, 1.0, form="full")
    back = dirac_full_momentum_apply(spec, bump, time_sign=-1)
    assert np.max(np.abs(back.entries - dirac_massive_full.entries.conj().T)) <= 1e-10


def test_full_dirac_small_time_is_point_evaluation(bump):
    spec = PropagatorSpec("dirac_massive", 1e-3, 1.0, form="full")
    res = dirac_full_momentum_apply(spec, bump)
    phi0 = float(bump(np.zeros((1, 3)))[0])
    assert np.max(np.abs(res.entries - phi0 * np.eye(4))) <= 1e-2 * phi0


def test_fw_equivalence_massless(bump):
    out = fw_equivalence(PropagatorSpec("dirac_massless", 1.0, form="full"), bump)
    assert out["converged"]
    assert np.max(out["full_vs_conjugated"]) <= max(np.max(out["full_vs_conjugated_error"]), 1e-12)
    assert np.max(out["projection_vs_fw"]) <= 1e-5
    c = qc3d_apply(1.0, bump).value
    np.testing.assert_allclose(out["projected"].diagonal(), [c, c, np.conj(c), np.conj(c)], atol=1e-10)


def test_maxwell_full_propagates_constant_vector(bump):
    v = np.array([0.3, -0.2j, 1.0])
    res = maxwell_full_momentum_apply(1.0, bump, initial_vector=v)
    np.testing.assert_allclose(res.info["vector"], res.dot(v), atol=1e-15)
    # radial bump: the transverse part is 2/3 of the trace, the frozen part phi(0)/3
    c = qc3d_apply(1.0, bump).value
    phi0 = float(bump(np.zeros((1, 3)))[0])
    expect = (2 * c.real + phi0) / 3
    np.testing.assert_allclose(res.entries, expect * np.eye(3), atol=1e-10)


# classical limit

def test_classical_limit_inside_cone():
    rows = classical_limit_scan([20.0, 30.0, 40.0], t=1.0, r_grid=(0.0,))
    assert rows[0]["regime"] == "inside"
    assert abs(rows[0]["slope"] - 1.0) <= 0.02


def test_classical_limit_outside_cone():
    rows = classical_limit_scan([20.0, 30.0, 40.0], t=1.0, r_grid=(1.5,))
    expected = -math.sqrt(1.25)
    assert rows[0]["expected"] == pytest.approx(expected)
    assert abs(rows[0]["slope"] - expected) <= 0.02 * abs(expected)


def test_classical_limit_rejects_light_cone():
    with pytest.raises(ValueError):
        classical_limit_scan([20.0, 30.0, 40.0], t=1.0, r_grid=(1.0,))
    with pytest.raises(ValueError):
        classical_limit_scan([30.0, 20.0], t=1.0, r_grid=(0.0,))


def test_massive_kernel_reduces_to_massless():
    t, r = 1.0, np.array([0.3, 1.7])
    ref = -1j / math.pi ** 2 * t / (t * t - r * r) ** 2
    np.testing.assert_allclose(massive_kernel_3d(t, r, 1e-9), ref, rtol=1e-12)


# validation

@pytest.mark.parametrize("kwargs", [
    dict(kind="dirac", t=1.0),
    dict(kind="dirac_massless", t=0.0),
    dict(kind="dirac_massless", t=1.0, m=1.0),
    dict(kind="dirac_massive", t=1.0, m=0.0),
    dict(kind="maxwell", t=1.0, form="diagonal"),
    dict(kind="dirac_massive", t=1.0, m=1.0, representation="weyl"),
])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        PropagatorSpec(**kwargs)


def test_spec_size():
    assert PropagatorSpec("maxwell", 1.0).size == 3
    assert PropagatorSpec("dirac_massive", 1.0, 2.0).size == 4
