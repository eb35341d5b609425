import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcauchy.specfun import (
    MacdonaldOverflowError,
    MacdonaldUnderflowError,
    b_factor_1d,
    b_factor_3d,
    b_factor_3d_dr,
    macdonald_k0,
    macdonald_k1,
    macdonald_k2,
    mass_argument,
    zk1,
)


def mp_k(nu, z):
    return complex(mpmath.besselk(nu, mpmath.mpc(z.real, z.imag)))


def test_k1_small_argument():
    z = 1e-4
    assert abs(z * macdonald_k1(z) - 1) <= 1e-3


def test_k1_large_argument_asymptotics():
    ratio = macdonald_k1(30.0) / (np.sqrt(np.pi / 60) * np.exp(-30.0))
    assert abs(ratio - 1) <= 0.02


def test_k1_integral_representation():
    # independent oracle: K1(z) = int_0^inf exp(-z cosh u) cosh u du
    with mpmath.workdps(30):
        ref = float(mpmath.quad(lambda u: mpmath.exp(-mpmath.cosh(u)) * mpmath.cosh(u), [0, 1, 2, 4, 8]))
    assert abs(macdonald_k1(1.0) - ref) <= 1e-13 * ref


@pytest.mark.parametrize("z", [1e-4, 0.3 + 0.2j, 1j, -1j, 2.0 - 1.999j, 5j, 7.5 + 3j, 40j, -30j, 45.0])
def test_k_orders_against_mpmath(z):
    z = complex(z)
    for nu, fn in ((0, macdonald_k0), (1, macdonald_k1), (2, macdonald_k2)):
        ref = mp_k(nu, z)
        assert abs(fn(z) - ref) <= 1e-13 * abs(ref)


@settings(max_examples=80, deadline=None)
@given(st.floats(1e-3, 45.0), st.floats(-np.pi * 0.98 / 2 - 0.7, np.pi * 0.98 / 2 + 0.7))
def test_k1_principal_branch_property(r, arg):
    z = r * np.exp(1j * arg)
    ref = mp_k(1, z)
    assert abs(macdonald_k1(z) - ref) <= 5e-13 * abs(ref)


def test_k1_conjugation_symmetry():
    z = np.array([0.5 + 2j, 3 + 0.1j, 10j])
    np.testing.assert_allclose(macdonald_k1(z.conj()), np.conj(macdonald_k1(z)), rtol=1e-15)


def test_k1_range_errors():
    with pytest.raises(MacdonaldUnderflowError):
        macdonald_k1(800.0)
    assert macdonald_k1(800.0, strict=False) == 0
    with pytest.raises(MacdonaldOverflowError):
        macdonald_k1(1e-320)
    with pytest.raises(ValueError):
        macdonald_k1(-1.0)
    with pytest.raises(ZeroDivisionError):
        macdonald_k1(0.0)


def test_zk1_limit_at_zero():
    assert zk1(0.0) == 1


def test_mass_argument_branches():
    assert mass_argument(1.0, 2.0, 1.0) == pytest.approx(np.sqrt(3.0))
    assert mass_argument(1.0, 0.0, 2.0, branch=-1) == pytest.approx(-2j)
    assert mass_argument(1.0, 0.0, 2.0, branch=1) == pytest.approx(2j)
    with pytest.raises(ValueError):
        mass_argument(1.0, 0.0, 1.0, branch=0)


def test_b1_on_light_cone():
    assert abs(b_factor_1d(1.0, 1.0, 2.0) - 1) < 1e-15
    assert abs(b_factor_1d(1.0, -1.0, 2.0) - 1) < 1e-15


def test_b1_massless_limit():
    assert abs(b_factor_1d(1.0, 0.3, 1e-8) - 1) < 1e-12


def test_b1_reference_value():
    # B(1, 0) = z K1(z) at z = -i
    ref = -1j * mp_k(1, -1j)
    assert abs(b_factor_1d(1.0, 0.0, 1.0) - ref) <= 1e-14
    # cross-check through the Hankel-function relation K1(-i) = -(pi/2) H1^(1)(1)
    h1 = complex(mpmath.hankel1(1, 1))
    assert abs(b_factor_1d(1.0, 0.0, 1.0) - (-1j) * (-np.pi / 2) * h1) <= 1e-14


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.0, 8.0), st.floats(0.01, 10.0))
def test_b_factors_even(t, x, m):
    assert b_factor_1d(t, x, m) == b_factor_1d(t, -x, m)
    assert b_factor_3d(t, x, m) == b_factor_3d(t, -x, m)


def test_b3_near_light_cone():
    # B - 1 ~ -m^2 t (r - t) / 2 near the cone, so the 1e-6 band needs m t small
    t, m = 1.0, 0.1
    for r in (t * (1 - 1e-4), t * (1 + 1e-4)):
        assert abs(b_factor_3d(t, r, m) - 1) <= 1e-6


def test_b3_first_order_departure_from_cone():
    t, m = 1.3, 1.0
    for d in (1e-4, -1e-4):
        r = t * (1 + d)
        slope = (b_factor_3d(t, r, m) - 1) / (r - t)
        assert abs(slope - (-0.5 * m * m * t)) <= 1e-3


def test_b3_massless_limit():
    assert abs(b_factor_3d(1.0, 0.4, 1e-8) - 1) <= 1e-6


def test_b3_matches_l_squared_derivative():
    # B = i m l^4 d/d(l^2) [K1(-i m l) / l], finite differences in u = l^2
    t, r, m = 2.0, 1.0, 1.0

    def g(u):
        l = np.sqrt(u)
        return mp_k(1, -1j * m * l) / l

    u = t * t - r * r
    h = 1e-5
    deriv = (g(u + h) - g(u - h)) / (2 * h)
    fd = 1j * m * u * u * deriv
    b = b_factor_3d(t, r, m)
    assert abs(b - fd) <= 1e-6 * abs(b)


def test_b3_radial_derivative():
    t, m = 1.0, 1.5
    for r in (0.3, 0.9, 1.4, 2.5):
        h = 1e-6
        fd = (b_factor_3d(t, r + h, m) - b_factor_3d(t, r - h, m)) / (2 * h)
        assert abs(b_factor_3d_dr(t, r, m) - fd) <= 1e-7 * max(1, abs(fd))


def test_b_conjugate_branch():
    assert b_factor_1d(1.0, 0.2, 1.0, branch=1) == pytest.approx(np.conj(b_factor_1d(1.0, 0.2, 1.0)), abs=1e-15)


def test_b_rejects_bad_parameters():
    with pytest.raises(ValueError):
        b_factor_1d(0.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        b_factor_3d(1.0, 0.5, -1.0)
