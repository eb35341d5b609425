import math

import numpy as np
import pytest
from scipy import integrate

from qcauchy.functionals import (
    KINDS,
    ORACLE_CONFIG,
    ORACLE_CONFIG_3D,
    FunctionalKind,
    FunctionalValue,
    apply,
    cauchy_density_real_time,
    compose_1d,
    conjugate_apply,
    evaluate,
    integrate_density,
    momentum_pairing,
    qc1d_apply,
    qc1d_massive_apply,
    qc3d_apply,
    qc3d_massive_apply,
)
from qcauchy.harness import standard_bump
from qcauchy.specfun import macdonald_k1
from qcauchy.testfn import BumpFunction, Combination, spherical_average

# momentum-side oracle values at t = 1 (m = 1 for the massive kinds) on the
# standard bumps, computed with momentum_pairing and the oracle configs
FROZEN_ORACLE = {
    "1d_massless": 0.07037399352061535 + 0.20710213364116356j,
    "1d_massive": -0.02721090558006123 + 0.25615583922191826j,
    "3d_massless": -0.3107619098565822 + 0.3982015097107119j,
    "3d_massive": -0.3832628775128258 + 0.346173024224762j,
}
PARSEVAL_TOL = {1: 1e-6, 3: 1e-5}


def mollifier(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


# real-time densities

@pytest.mark.parametrize("dim", [1, 3])
def test_density_integrates_to_one(dim):
    res = integrate_density(1.3, dim)
    assert abs(res.value - 1) <= 1e-10


def test_density_values():
    k1 = cauchy_density_real_time(2.0, 1)
    assert k1(1.0) == pytest.approx(2.0 / (math.pi * 5.0), rel=1e-15)
    k3 = cauchy_density_real_time(1.0, 3)
    # the 3D density takes r = |x|; at x = (1, 1, 1), r^2 = 3
    r = math.sqrt(3.0)
    assert k3(r) == pytest.approx(1.0 / (math.pi ** 2 * 16.0), rel=1e-14)
    # the 3D density is not a product of 1D densities
    k1_unit = cauchy_density_real_time(1.0, 1)
    assert abs(k3(r) - k1_unit(1.0) ** 3) > 1e-3 * k3(r)


def test_density_rejects_bad_time():
    with pytest.raises(ValueError):
        cauchy_density_real_time(0.0, 1)


# 1D massless

def test_1d_poles_outside_support():
    phi = BumpFunction(1, (3.0,), 1.0)
    t = 1.0
    v = qc1d_apply(t, phi)
    assert v.delta_part == 0
    ref, _ = integrate.quad(lambda x: t * mollifier(x - 3.0) / (t * t - x * x), 2, 4,
                            epsabs=1e-15, epsrel=1e-13)
    assert abs(v.kernel_part - 1j * ref / math.pi) <= 1e-12


def test_1d_even_delta_part():
    phi = BumpFunction(1, (0.0,), 2.0)
    v = qc1d_apply(0.7, phi)
    assert v.delta_part == pytest.approx(phi(0.7), rel=1e-15)


@pytest.mark.parametrize("name", sorted(FROZEN_ORACLE))
def test_parseval_against_frozen_oracle(name):
    kind = KINDS[name]
    v = evaluate(kind, 1.0, standard_bump(kind.dimension))
    ref = FROZEN_ORACLE[name]
    assert abs(v.value - ref) <= PARSEVAL_TOL[kind.dimension] * abs(ref)
    # much tighter in practice
    assert abs(v.value - ref) <= 1e-12 * abs(ref)


@pytest.mark.parametrize("name", ["1d_massless", "1d_massive"])
def test_parseval_live_oracle_1d(name):
    kind = KINDS[name]
    phi = standard_bump(1)
    o = momentum_pairing(kind, 1.0, phi, config=ORACLE_CONFIG)
    assert abs(o.value - FROZEN_ORACLE[name]) <= 1e-13


def test_parseval_offcenter_3d():
    phi = BumpFunction(3, (0.4, -0.3, 0.2), 1.0)
    kind = KINDS["3d_massless"]
    v = evaluate(kind, 0.8, phi)
    o = momentum_pairing(kind, 0.8, phi, config=ORACLE_CONFIG_3D)
    assert abs(v.value - o.value) <= 1e-5 * abs(o.value)


def test_value_is_sum_of_parts():
    v = qc1d_massive_apply(1.0, 2.0, standard_bump(1))
    assert v.value == v.delta_part + v.kernel_part
    assert v.error_estimate >= 0
    d = v.as_dict()
    assert d["value"] == v.value and d["kind"] == "1d_massive"


# 3D massless

def test_3d_support_away_from_sphere():
    c, a, t = 2.5, 0.5, 1.0
    phi = BumpFunction(3, (c, 0.0, 0.0), a)
    v = qc3d_apply(t, phi)
    assert v.delta_part == 0

    def avg(r):
        lo, hi = abs(r - c), min(r + c, a + c)
        val, _ = integrate.quad(lambda s: s * mollifier((s - c) / a), max(lo, c - a), hi, epsabs=1e-15)
        return 0.0 if hi <= max(lo, c - a) else val / (2 * r * c)

    # spherical mean of f(x - c) over S_r for an isotropic bump f around |c|
    def shell(r):
        lo, hi = abs(r - c), r + c
        val, _ = integrate.quad(lambda s: s * mollifier(s / a), lo, min(hi, a), epsabs=1e-16)
        return val / (2 * r * c) if lo < a else 0.0

    direct, _ = integrate.quad(lambda r: 4 * math.pi * t * r * r * shell(r) / (t * t - r * r) ** 2,
                               c - a, c + a, epsabs=1e-15, epsrel=1e-12)
    np.testing.assert_allclose(spherical_average(phi, np.array([2.2, 2.7])),
                               [shell(2.2), shell(2.7)], rtol=1e-10)
    assert abs(v.kernel_part - (-1j / math.pi ** 2) * direct) <= 1e-10 * abs(direct)


def test_3d_delta_part_is_sphere_average_with_derivative_correction():
    phi = standard_bump(3)
    t = 0.6
    v = qc3d_apply(t, phi)
    h = 1e-5
    avg = lambda r: float(spherical_average(phi, r))
    expect = avg(t) + t * (avg(t + h) - avg(t - h)) / (2 * h)
    assert abs(v.delta_part - expect) <= 1e-8


# limits

@pytest.mark.parametrize("dim, tol", [(1, 1e-6), (3, 1e-5)])
def test_massless_limit(dim, tol):
    phi = standard_bump(dim)
    massless = apply(FunctionalKind(dim), 1.0, phi)
    massive = apply(FunctionalKind(dim, 1e-8), 1.0, phi)
    assert abs(massive.value - massless.value) <= tol * abs(massless.value)


def test_massive_outside_light_cone_envelope():
    # support in [2, 4], t = 1, m = 2: |kernel| <= sup|phi| (t/pi) |supp| max B/(x^2 - t^2)
    t, m = 1.0, 2.0
    phi = BumpFunction(1, (3.0,), 1.0)
    v = qc1d_massive_apply(t, m, phi)
    assert v.delta_part == 0
    x0 = 2.0
    z = m * math.sqrt(x0 * x0 - t * t)
    envelope = math.sqrt(math.pi * z / 2) * math.exp(-z) * (1 + 3 / (8 * z))
    assert z * macdonald_k1(z).real <= envelope
    bound = math.exp(-1) * (t / math.pi) * 2.0 * envelope / (x0 * x0 - t * t)
    assert 0 < abs(v.kernel_part) <= bound


def test_massive_outside_cone_matches_direct_quadrature():
    t, m = 1.0, 2.0
    phi = BumpFunction(1, (3.0,), 1.0)
    v = qc1d_massive_apply(t, m, phi)

    def f(x):
        z = m * math.sqrt(x * x - t * t)
        return t * z * macdonald_k1(z).real * mollifier(x - 3.0) / (t * t - x * x)

    ref, _ = integrate.quad(f, 2, 4, epsabs=1e-16, epsrel=1e-12)
    assert abs(v.kernel_part - 1j * ref / math.pi) <= 1e-10 * abs(ref)


@pytest.mark.parametrize("dim", [1, 3])
def test_small_time_concentration(dim):
    phi = BumpFunction(dim, (0.0,) * dim, 1.0)
    v = apply(FunctionalKind(dim), 1e-3, phi)
    phi0 = float(np.exp(-1.0))
    assert abs(v.delta_part - phi0) <= 1e-2 * phi0
    assert abs(v.value - phi0) <= 1e-2 * phi0


# conjugates and symmetry

@pytest.mark.parametrize("name", ["1d_massless", "1d_massive", "3d_massless", "3d_massive"])
def test_conjugate_of_real_test_function(name):
    kind = KINDS[name]
    phi = standard_bump(kind.dimension)
    fwd = evaluate(kind, 1.0, phi)
    conj = conjugate_apply(kind, 1.0, kind.mass, phi)
    assert abs(conj.value - np.conj(fwd.value)) <= 1e-12
    assert conj.delta_part == fwd.delta_part


@pytest.mark.parametrize("name", ["1d_massless", "1d_massive"])
def test_conjugate_direct_evaluation(name):
    kind = KINDS[name]
    phi = BumpFunction(1, (0.2,), 1.1)
    direct = evaluate(kind.conjugate(), 0.9, phi)
    assert abs(direct.value - np.conj(evaluate(kind, 0.9, phi).value)) <= 1e-12


def test_momentum_oracle_signs_are_conjugate():
    kind = KINDS["1d_massive"]
    phi = standard_bump(1)
    a = momentum_pairing(kind, 1.0, phi, config=ORACLE_CONFIG)
    b = momentum_pairing(kind.conjugate(), 1.0, phi, config=ORACLE_CONFIG)
    assert abs(a.value - np.conj(b.value)) <= 1e-13


@pytest.mark.parametrize("name", ["1d_massless", "1d_massive"])
def test_1d_parity(name):
    kind = KINDS[name]
    phi = BumpFunction(1, (0.35,), 0.9)
    a = evaluate(kind, 1.0, phi)
    b = evaluate(kind, 1.0, phi.reflected())
    assert abs(a.value - b.value) <= 1e-12


def test_3d_rotation_invariance():
    th = 0.7
    R = np.array([[math.cos(th), -math.sin(th), 0.0], [math.sin(th), math.cos(th), 0.0], [0.0, 0.0, 1.0]])
    c = np.array([0.3, 0.1, -0.2])
    a = BumpFunction(3, tuple(c), 1.0)
    b = BumpFunction(3, tuple(R @ c), 1.0)
    kind = KINDS["3d_massless"]
    va, vb = evaluate(kind, 0.9, a), evaluate(kind, 0.9, b)
    assert abs(va.value - vb.value) <= 1e-11


@pytest.mark.parametrize("name", ["1d_massless", "1d_massive", "3d_massless"])
def test_linearity(name):
    kind = KINDS[name]
    d = kind.dimension
    f = BumpFunction(d, (0.2,) + (0.0,) * (d - 1), 1.0)
    g = BumpFunction(d, (-0.4,) + (0.1,) * (d - 1), 0.7)
    alpha, beta = 1.5, -0.25
    lhs = evaluate(kind, 0.8, Combination(((alpha, f), (beta, g))))
    rhs = alpha * evaluate(kind, 0.8, f).value + beta * evaluate(kind, 0.8, g).value
    assert abs(lhs.value - rhs) <= 1e-11


def test_semigroup_composition_1d():
    phi = standard_bump(1)
    comp, bound = compose_1d(2.0, 1.0, phi, R=100.0)
    direct = qc1d_apply(2.0, phi)
    assert abs(comp.value - direct.value) <= bound + comp.error_estimate + direct.error_estimate
    assert abs(comp.value - direct.value) <= 1e-3


# preconditions

@pytest.mark.parametrize("t", [0.0, -1.0, float("nan"), float("inf")])
def test_time_must_be_positive(t):
    with pytest.raises(ValueError):
        qc1d_apply(t, standard_bump(1))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        qc3d_apply(1.0, standard_bump(1))


def test_mass_must_be_positive_for_massive_kinds():
    with pytest.raises(ValueError):
        qc1d_massive_apply(1.0, 0.0, standard_bump(1))
    with pytest.raises(ValueError):
        qc3d_massive_apply(1.0, -2.0, standard_bump(3))


def test_kind_validation():
    with pytest.raises(ValueError):
        FunctionalKind(2)
    with pytest.raises(ValueError):
        FunctionalKind(1, 0.0, "backward")
    assert FunctionalKind(3, 1.0, "conjugate").name == "3d_massive_conjugate"
    assert FunctionalKind(3, 1.0).conjugate().sign == -1


def test_functional_value_conj():
    v = FunctionalValue(0.5, 0.25j, 1e-14, KINDS["1d_massless"], 1.0)
    c = v.conj()
    assert c.value == 0.5 - 0.25j and c.kind.time_sign == "conjugate"
