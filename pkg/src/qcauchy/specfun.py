"""Macdonald functions of complex argument and the mass factors of the kernels.

K0 and K1 are evaluated with the ascending power series for ``|z| <= 2`` and
with Steed's continued fraction (CF2) for ``|z| > 2`` in the closed right
half-plane.  In the open left half-plane the analytic continuation

    K_nu(z) = (-1)^nu K_nu(-z) -/+ i pi I_nu(-z),   Im z >= 0 / Im z < 0

is used, with I0, I1 obtained from the continued fraction for I1/I0 and the
Wronskian.  All routines accept scalars or arrays.

Branch convention for the kernels
---------------------------------
The mass factors are functions of ``z = m * sqrt(x**2 - t**2 - i0)``: real and
positive outside the light cone, ``z = -i m l`` with ``l = sqrt(t**2 - x**2)``
inside it.  This is the branch reproduced by the momentum-space pairing with
``exp(+i t sqrt(m**2 + p**2))``; the opposite branch ``+i m l`` gives the
conjugate functional.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "MacdonaldOverflowError",
    "MacdonaldUnderflowError",
    "macdonald_k0",
    "macdonald_k1",
    "macdonald_k2",
    "zk1",
    "mass_argument",
    "b_factor_1d",
    "b_factor_3d",
    "b_factor_3d_dr",
    "SERIES_RADIUS",
]

EULER_GAMMA = 0.57721566490153286061
# crossover between the power series and the continued fractions
SERIES_RADIUS = 2.0
# exp(-z) leaves the double range beyond this
_EXP_LIMIT = 700.0
_SERIES_TERMS = 40
_CF_MAX_ITER = 5000


class MacdonaldOverflowError(OverflowError):
    """K_nu(z) exceeds the double range (``Re z`` far in the left half-plane)."""


class MacdonaldUnderflowError(ArithmeticError):
    """K_nu(z) is below the double range (``Re z`` too large)."""


def _series(z):
    """Return ``(K0, z*K1, z**2*K0)`` from the ascending series.

    The products with powers of z are formed term by term so they stay finite
    at ``z = 0``, where ``z*K1 = 1`` and ``z**2*K0 = 0``.
    """
    z = np.asarray(z, dtype=complex)
    h = 0.5 * z
    q = h * h
    nz = z != 0
    lg = np.log(np.where(nz, h, 1.0))
    a = np.ones_like(z)  # q^k / (k!)^2
    b = np.ones_like(z)  # q^k / (k! (k+1)!)
    i0 = np.zeros_like(z)
    i1h = np.zeros_like(z)  # I1 / h
    s0 = np.zeros_like(z)
    s1 = np.zeros_like(z)
    harm = 0.0
    psi1 = -EULER_GAMMA
    psi2 = 1.0 - EULER_GAMMA
    for k in range(_SERIES_TERMS):
        i0 = i0 + a
        i1h = i1h + b
        s0 = s0 + a * harm
        s1 = s1 + b * (psi1 + psi2)
        k1 = k + 1
        a = a * q / (k1 * k1)
        b = b * q / (k1 * (k1 + 1))
        harm += 1.0 / k1
        psi1 += 1.0 / k1
        psi2 += 1.0 / (k1 + 1)
    k0 = -(lg + EULER_GAMMA) * i0 + s0
    # z K1 = 1 + z ln(z/2) I1 - (z^2/4) s1, with I1 = h * i1h
    zk1_ = 1.0 + z * lg * h * i1h - 0.25 * z * z * s1
    z2k0 = np.where(nz, z * z * k0, 0.0)
    zk1_ = np.where(nz, zk1_, 1.0)
    return k0, zk1_, z2k0


def _steed_cf2(z):
    """Scaled ``(e^z K0, e^z K1)`` by Steed's CF2; valid for Re z >= 0, |z| > 2."""
    z = np.asarray(z, dtype=complex)
    b = 2.0 * (1.0 + z)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(z)
    q2 = np.ones_like(z)
    a1 = 0.25
    q = np.full_like(z, a1)
    c = np.full_like(z, a1)
    a = -a1
    s = 1.0 + q * delh
    active = np.ones(z.shape, dtype=bool)
    for i in range(2, _CF_MAX_ITER):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = np.where(active, h + delh, h)
        dels = q * delh
        s = np.where(active, s + dels, s)
        active &= np.abs(dels) >= 1e-17 * np.abs(s)
        if not active.any():
            break
    else:
        raise RuntimeError("continued fraction for K did not converge")
    h = a1 * h
    k0s = np.sqrt(np.pi / (2.0 * z)) / s
    k1s = k0s * (z + 0.5 - h) / z
    return k0s, k1s


def _i_ratio(w):
    """I1(w)/I0(w) by Lentz's method on the Gauss continued fraction."""
    w = np.asarray(w, dtype=complex)
    tiny = 1e-300
    xi = 1.0 / w
    # I1/I0 = 1/(2/w + 1/(4/w + ...))
    f = np.full_like(w, tiny)
    cc = f.copy()
    dd = np.zeros_like(w)
    active = np.ones(w.shape, dtype=bool)
    for k in range(1, _CF_MAX_ITER):
        bk = 2.0 * k * xi
        dd = bk + dd
        dd = np.where(np.abs(dd) < tiny, tiny, dd)
        cc = bk + 1.0 / cc
        cc = np.where(np.abs(cc) < tiny, tiny, cc)
        dd = 1.0 / dd
        delta = cc * dd
        f = np.where(active, f * delta, f)
        active &= np.abs(delta - 1.0) >= 1e-16
        if not active.any():
            break
    else:
        raise RuntimeError("continued fraction for I1/I0 did not converge")
    return f


def _k01_right(z):
    """Unscaled (K0, K1) for Re z >= 0, z != 0."""
    z = np.asarray(z, dtype=complex)
    k0 = np.empty_like(z)
    k1 = np.empty_like(z)
    small = np.abs(z) <= SERIES_RADIUS
    if small.any():
        zs = z[small]
        a, zk, _ = _series(zs)
        k0[small] = a
        k1[small] = zk / zs
    if (~small).any():
        zl = z[~small]
        k0s, k1s = _steed_cf2(zl)
        e = np.exp(-zl)
        k0[~small] = k0s * e
        k1[~small] = k1s * e
    return k0, k1


def _k01(z):
    z = np.asarray(z, dtype=complex)
    k0 = np.empty_like(z)
    k1 = np.empty_like(z)
    # the series is valid everywhere; use it for small |z| in both half-planes
    right = (z.real >= 0) | (np.abs(z) <= SERIES_RADIUS)
    if right.any():
        k0[right], k1[right] = _k01_right(z[right])
    left = ~right
    if left.any():
        zl = z[left]
        w = -zl
        kw0, kw1 = _k01_right(w)
        r = _i_ratio(w)
        i0 = 1.0 / (w * (kw1 + r * kw0))
        i1 = r * i0
        sgn = np.where(zl.imag >= 0, -1.0, 1.0)
        k0[left] = kw0 + sgn * 1j * np.pi * i0
        k1[left] = -kw1 + sgn * 1j * np.pi * i1
    return k0, k1


# K1(z) ~ 1/z leaves the double range below this modulus
_TINY_ARGUMENT = 1.0 / np.finfo(float).max


def _prepare(z, strict):
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("argument must be finite")
    if np.any(arr == 0):
        raise ZeroDivisionError("K_nu has a pole at z = 0")
    if np.any((arr.real < 0) & (arr.imag == 0)):
        raise ValueError("argument lies on the branch cut (negative real axis)")
    if strict:
        if np.any(np.abs(arr) < _TINY_ARGUMENT) or np.any(arr.real < -_EXP_LIMIT):
            raise MacdonaldOverflowError("K_nu(z) overflows for Re z < -%g" % _EXP_LIMIT)
        if np.any(arr.real > _EXP_LIMIT):
            raise MacdonaldUnderflowError("K_nu(z) underflows for Re z > %g" % _EXP_LIMIT)
    return arr


def _finish(val, z, scalar):
    val = np.where(z.real > _EXP_LIMIT, 0.0, val)
    return complex(val) if scalar else val


def macdonald_k0(z, strict: bool = True):
    """Macdonald function K0 on the principal branch ``|arg z| < pi``."""
    arr = _prepare(z, strict)
    k0, _ = _k01(np.atleast_1d(arr))
    return _finish(k0.reshape(arr.shape), arr, np.ndim(z) == 0)


def macdonald_k1(z, strict: bool = True):
    """Macdonald function K1 on the principal branch ``|arg z| < pi``.

    Parameters
    ----------
    z : complex or array_like
        Nonzero argument off the negative real axis.
    strict : bool
        If True, arguments whose result leaves the double range raise
        :class:`MacdonaldOverflowError` or :class:`MacdonaldUnderflowError`.
        Otherwise underflowing values are returned as 0.

    Returns
    -------
    complex or ndarray
        Relative accuracy is about 1e-14 for ``1e-4 <= |z| <= 50``.  The series
        is used for ``|z| <= 2`` and continued fractions beyond.
    """
    arr = _prepare(z, strict)
    _, k1 = _k01(np.atleast_1d(arr))
    return _finish(k1.reshape(arr.shape), arr, np.ndim(z) == 0)


def macdonald_k2(z, strict: bool = True):
    """K2 from the recurrence ``K2 = K0 + 2 K1 / z``."""
    arr = _prepare(z, strict)
    k0, k1 = _k01(np.atleast_1d(arr))
    a = np.atleast_1d(arr)
    out = (k0 + 2.0 * k1 / a).reshape(arr.shape)
    return _finish(out, arr, np.ndim(z) == 0)


def _zk_products(z):
    """Return ``(z K1(z), z**2 K2(z) / 2)``, finite and exact at ``z = 0``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    zk1_ = np.empty_like(z)
    b3 = np.empty_like(z)
    small = np.abs(z) <= SERIES_RADIUS
    if small.any():
        _, zk, z2k0 = _series(z[small])
        zk1_[small] = zk
        b3[small] = 0.5 * z2k0 + zk
    big = ~small
    if big.any():
        zb = z[big]
        under = zb.real > _EXP_LIMIT
        zc = np.where(under, 1.0, zb)
        k0, k1 = _k01(zc)
        zk1_[big] = np.where(under, 0.0, zc * k1)
        b3[big] = np.where(under, 0.0, 0.5 * zc * zc * k0 + zc * k1)
    return zk1_, b3


def zk1(z):
    """``z K1(z)`` continued to ``z = 0`` by its limit 1."""
    arr = np.asarray(z, dtype=complex)
    out = _zk_products(arr)[0].reshape(arr.shape)
    return complex(out) if arr.ndim == 0 else out


def mass_argument(t, x, m, branch: int = -1):
    """``z = m sqrt(x**2 - t**2)`` continued into the light cone.

    Outside the cone (``|x| > t``) z is real and positive.  Inside, ``z = i *
    branch * m * l`` with ``l = sqrt(t**2 - x**2)``.  ``branch=-1`` belongs to
    the forward functional, ``branch=+1`` to its conjugate.
    """
    if branch not in (-1, 1):
        raise ValueError("branch must be -1 or +1")
    x = np.asarray(x, dtype=float)
    s = x * x - t * t
    # outside: real sqrt, inside: imaginary with the branch sign
    root = np.sqrt(np.abs(s))
    return np.where(s >= 0, m * root + 0j, branch * 1j * m * root)


def _check_tm(t, m):
    if not (np.isfinite(t) and t > 0):
        raise ValueError("t must be positive")
    if not (np.isfinite(m) and m >= 0):
        raise ValueError("m must be non-negative")


def b_factor_1d(t: float, x, m: float, branch: int = -1):
    """Mass factor of the 1D kernel, ``B = z K1(z)``.

    The massive kernel equals the massless one times B.  B is even in x,
    equals 1 on the light cone and tends to 1 as ``m -> 0``.

    Examples
    --------
    >>> abs(b_factor_1d(1.0, 1.0, 2.0) - 1) < 1e-15
    True
    """
    _check_tm(t, m)
    z = mass_argument(t, x, m, branch)
    out = _zk_products(z)[0].reshape(np.shape(z))
    return complex(out) if np.ndim(x) == 0 else out


def b_factor_3d(t: float, r, m: float, branch: int = -1):
    """Mass factor of the 3D kernel, ``B = z**2 K2(z) / 2``.

    Equivalently ``B = i m l**4 d/d(l**2) [K1(-i m l) / l]`` on the forward
    branch; the derivative is taken analytically through the recurrence for
    K2.  ``B -> 1`` on the light cone and as ``m -> 0``.
    """
    _check_tm(t, m)
    z = mass_argument(t, r, m, branch)
    out = _zk_products(z)[1].reshape(np.shape(z))
    return complex(out) if np.ndim(r) == 0 else out


def b_factor_3d_dr(t: float, r, m: float, branch: int = -1):
    """Radial derivative ``dB/dr = -(m**2 r / 2) z K1(z)`` of :func:`b_factor_3d`."""
    _check_tm(t, m)
    r_arr = np.asarray(r, dtype=float)
    z = mass_argument(t, r_arr, m, branch)
    out = (-0.5 * m * m * r_arr * _zk_products(z)[0].reshape(np.shape(z)))
    return complex(out) if np.ndim(r) == 0 else out
