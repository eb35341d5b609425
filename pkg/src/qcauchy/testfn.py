"""Test functions: compactly supported bumps, their Fourier images and spherical
averages.

Fourier convention (used everywhere in the package)::

    f^(p) = integral f(x) exp(-i (x, p)) dx,    f(x) = (2 pi)^-d integral f^(p) exp(i (x, p)) dp

Every bump is ``amplitude * h(|y| / a)`` with ``y = R^T (x - center)`` and a
reference profile h on the unit ball (or the inscribed cube for the product
profile).  Transforms are computed from the reference profile: in 1D
``f^(p) = A a exp(-i c p) h^(a p)``; for isotropic profiles in 3D ``h^`` is
the Hankel-type integral ``4 pi int s^2 h(s) j0(k s) ds``; the product profile
factorizes into 1D transforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "FOURIER_CONVENTION",
    "PROFILES",
    "TestFunction",
    "BumpFunction",
    "Combination",
    "FourierImage",
    "RadialProfile",
    "evaluate",
    "fourier",
    "spherical_average",
    "radial_profile",
    "spherical_moments",
    "spectral_moments",
    "sphere_rule",
    "spherical_j",
]

FOURIER_CONVENTION = {
    "kernel": "exp(-i x.p)",
    "forward_factor": 1.0,
    "inverse_factor": "(2 pi)^-d",
}

PROFILES = ("standard_mollifier", "polynomial_bump", "product")

_GL_ORDER = 40
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)
# minimum panels per unit length for the reference profile near its edge
_MIN_PANELS = 64
_MAX_PHASE_PER_PANEL = 8.0
_CHUNK = 256


def _ref_value(profile: str, order: int, s):
    """Reference profile h(s), s >= 0; exactly zero for s >= 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = s < 1.0
    u = 1.0 - s[inside] ** 2
    if profile == "polynomial_bump":
        out[inside] = u ** order
    else:
        out[inside] = np.exp(-1.0 / u)
    return out


def _ref_derivative(profile: str, order: int, s):
    """h'(s) for s >= 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = s < 1.0
    si = s[inside]
    u = 1.0 - si * si
    if profile == "polynomial_bump":
        out[inside] = -2.0 * order * si * u ** (order - 1)
    else:
        out[inside] = np.exp(-1.0 / u) * (-2.0 * si / (u * u))
    return out


@lru_cache(maxsize=64)
def _unit_grid(npan: int):
    """GL nodes and weights on [0, 1] with ``npan`` equal panels."""
    e = np.linspace(0.0, 1.0, npan + 1)
    mid = 0.5 * (e[:-1] + e[1:])
    half = 0.5 * (e[1:] - e[:-1])
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _panels_for(kmax: float) -> int:
    n = max(_MIN_PANELS, int(math.ceil(kmax / _MAX_PHASE_PER_PANEL)))
    # round up to a power of two so grids are shared between calls
    return 1 << (n - 1).bit_length()


def spherical_j(n: int, x):
    """Spherical Bessel functions j0, j1, j2 of real or complex argument.

    Small arguments use the Taylor series to avoid cancellation.
    """
    x = np.asarray(x)
    ax = np.abs(x)
    small = ax < 0.1
    xs = np.where(small, 0.0, x)
    xs = np.where(small, 1.0, xs)
    x2 = x * x
    if n == 0:
        big = np.sin(xs) / xs
        ser = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    elif n == 1:
        big = (np.sin(xs) / xs - np.cos(xs)) / xs
        ser = x / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0 * (1.0 - x2 / 54.0 * (1.0 - x2 / 88.0))))
    elif n == 2:
        big = ((3.0 / (xs * xs) - 1.0) * np.sin(xs) - 3.0 * np.cos(xs) / xs) / xs
        ser = x2 / 15.0 * (1.0 - x2 / 14.0 * (1.0 - x2 / 36.0 * (1.0 - x2 / 66.0 * (1.0 - x2 / 104.0))))
    else:
        raise ValueError("only orders 0, 1, 2 are provided")
    return np.where(small, ser, big)


@lru_cache(maxsize=256)
def _unit_integral(profile: str, order: int, dim: int) -> float:
    """Integral of the reference profile over R^dim (ball profiles) or 1D."""
    x, w = _unit_grid(_MIN_PANELS)
    h = _ref_value(profile, order, x)
    if dim == 1:
        return float(2.0 * np.sum(w * h))
    return float(4.0 * math.pi * np.sum(w * x * x * h))


def _ref_transform_1d(profile: str, order: int, q):
    """``int_{-1}^{1} h(s) exp(-i q s) ds`` (real and even for real q)."""
    q = np.asarray(q)
    flat = q.ravel()
    cplx = np.iscomplexobj(flat)
    out = np.empty(flat.shape, dtype=complex if cplx else float)
    for i in range(0, len(flat), _CHUNK):
        blk = flat[i:i + _CHUNK]
        x, w = _unit_grid(_panels_for(float(np.max(np.abs(blk), initial=0.0))))
        hw = 2.0 * w * _ref_value(profile, order, x)
        out[i:i + _CHUNK] = np.cos(np.multiply.outer(blk, x)) @ hw
    return out.reshape(q.shape)


def _ref_transform_3d(profile: str, order: int, k):
    """``4 pi int_0^1 s^2 h(s) j0(k s) ds``: transform of the isotropic profile."""
    k = np.asarray(k)
    flat = k.ravel()
    cplx = np.iscomplexobj(flat)
    out = np.empty(flat.shape, dtype=complex if cplx else float)
    for i in range(0, len(flat), _CHUNK):
        blk = flat[i:i + _CHUNK]
        x, w = _unit_grid(_panels_for(float(np.max(np.abs(blk), initial=0.0))))
        hw = 4.0 * math.pi * w * x * x * _ref_value(profile, order, x)
        out[i:i + _CHUNK] = spherical_j(0, np.multiply.outer(blk, x)) @ hw
    return out.reshape(k.shape)


class TestFunction:
    """Common interface of bumps and their linear combinations.

    Subclasses provide ``dimension``, ``__call__``, ``gradient``, ``balls``
    (list of ``(center, radius)`` covering the support) and ``fourier``.
    """

    __test__ = False  # not a pytest class
    dimension: int

    def __call__(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def fourier(self, p):
        raise NotImplementedError

    @property
    def balls(self) -> list:
        raise NotImplementedError

    @property
    def is_radial(self) -> bool:
        """True if the function depends on |x| only."""
        return False

    # support helpers

    def support_interval(self) -> tuple[float, float]:
        """Smallest interval containing the support (1D)."""
        if self.dimension != 1:
            raise ValueError("support_interval is for d = 1")
        lo = min(c[0] - a for c, a in self.balls)
        hi = max(c[0] + a for c, a in self.balls)
        return lo, hi

    def radial_extent(self) -> tuple[float, float]:
        """Range of |x| over the support."""
        inner = min(max(0.0, float(np.linalg.norm(c)) - a) for c, a in self.balls)
        outer = max(float(np.linalg.norm(c)) + a for c, a in self.balls)
        return inner, outer

    def value_at_origin(self) -> float:
        return float(np.asarray(self(np.zeros(self.dimension) if self.dimension > 1 else 0.0)))

    def integral(self) -> float:
        """Integral over R^d, which is the Fourier image at p = 0."""
        p = 0.0 if self.dimension == 1 else np.zeros(3)
        return float(np.real(self.fourier(p)))

    def spectral_mean(self, rho):
        """Average of the Fourier image over the sphere ``|p| = rho``.

        In 1D this is ``(f^(rho) + f^(-rho)) / 2 = int f(x) cos(rho x) dx``.
        """
        raise NotImplementedError

    def shifted(self, s):
        """The translate ``x -> f(x - s)``."""
        raise NotImplementedError

    def __add__(self, other):
        return Combination.of(self) + other

    def __radd__(self, other):
        if other == 0:
            return Combination.of(self)
        return NotImplemented

    def __mul__(self, c):
        return Combination.of(self) * c

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-1.0) * other


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    if dim == 1:
        return x
    if x.shape[-1] != dim:
        raise ValueError("points must have trailing dimension %d" % dim)
    return x


@dataclass(frozen=True, eq=True)
class BumpFunction(TestFunction):
    """Compactly supported smooth bump on R^d, d in {1, 3}.

    Parameters
    ----------
    dimension : int
    center : sequence of float
    radius : float
        Support radius a; the function vanishes for ``|x - center| >= a``.
    amplitude : float
    profile : str
        ``"standard_mollifier"``: ``exp(-1/(1 - s^2))``;
        ``"polynomial_bump"``: ``(1 - s^2)^order`` (only ``C^(order-1)`` at
        the edge, meant for exact symbolic references);
        ``"product"``: product of 1D mollifiers of half-width ``a/sqrt(d)``
        along the rotated axes, supported in the inscribed cube.
    order : int
        Exponent of the polynomial profile.
    rotation : 3x3 nested tuple, optional
        Orthogonal matrix R (d = 3); the profile is evaluated at
        ``R^T (x - center)``.
    normalized : bool
        If True the amplitude is the integral of the function rather than its
        peak factor.
    """

    dimension: int = 1
    center: tuple = (0.0,)
    radius: float = 1.0
    amplitude: float = 1.0
    profile: str = "standard_mollifier"
    order: int = 8
    rotation: tuple | None = None
    normalized: bool = False
    _scale: float = field(init=False, repr=False, compare=False, default=1.0)

    def __post_init__(self):
        if self.dimension not in (1, 3):
            raise ValueError("dimension must be 1 or 3")
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        if c.shape == (1,) and self.dimension == 3 and float(c[0]) == 0.0:
            c = np.zeros(3)
        if c.shape != (self.dimension,):
            raise ValueError("center must have %d components" % self.dimension)
        if not np.all(np.isfinite(c)):
            raise ValueError("center must be finite")
        object.__setattr__(self, "center", tuple(float(v) for v in c))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError("radius must be positive")
        if not math.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        if self.profile not in PROFILES:
            raise ValueError("unknown profile %r; expected one of %s" % (self.profile, PROFILES))
        if self.profile == "polynomial_bump" and (int(self.order) != self.order or self.order < 2):
            raise ValueError("polynomial order must be an integer >= 2")
        object.__setattr__(self, "order", int(self.order))
        if self.rotation is not None:
            if self.dimension != 3:
                raise ValueError("rotation is only meaningful for d = 3")
            R = np.asarray(self.rotation, dtype=float)
            if R.shape != (3, 3) or not np.allclose(R.T @ R, np.eye(3), atol=1e-12):
                raise ValueError("rotation must be an orthogonal 3x3 matrix")
            object.__setattr__(self, "rotation", tuple(tuple(float(v) for v in row) for row in R))
        scale = self.amplitude
        if self.normalized:
            scale = self.amplitude / (self._unit_mass() * self.radius ** self.dimension)
        object.__setattr__(self, "_scale", float(scale))

    # geometry

    @property
    def a(self) -> float:
        return self.radius

    @property
    def balls(self) -> list:
        return [(np.asarray(self.center), self.radius)]

    @property
    def is_isotropic(self) -> bool:
        return self.profile != "product" or self.dimension == 1

    @property
    def is_radial(self) -> bool:
        return self.is_isotropic and not any(self.center)

    def _rot(self):
        return None if self.rotation is None else np.asarray(self.rotation)

    def _unit_mass(self) -> float:
        if self.profile == "product" and self.dimension == 3:
            m1 = _unit_integral("standard_mollifier", 0, 1)
            return (m1 / math.sqrt(3.0)) ** 3
        return _unit_integral(self.profile, self.order, self.dimension)

    def _local(self, x):
        y = x - np.asarray(self.center)
        R = self._rot()
        if R is not None:
            y = y @ R  # R^T y for row vectors
        return y

    # values

    def __call__(self, x):
        """Evaluate; exactly zero outside the open support."""
        x = _as_points(x, self.dimension)
        a = self.radius
        if self.dimension == 1:
            return self._scale * _ref_value(self.profile, self.order, np.abs(x - self.center[0]) / a)
        y = self._local(x)
        if self.profile == "product":
            b = a / math.sqrt(3.0)
            v = np.ones(y.shape[:-1])
            for j in range(3):
                v = v * _ref_value("standard_mollifier", 0, np.abs(y[..., j]) / b)
            return self._scale * v
        s = np.sqrt(np.sum(y * y, axis=-1)) / a
        return self._scale * _ref_value(self.profile, self.order, s)

    def gradient(self, x):
        """Gradient; shape of x for d = 1, ``(..., 3)`` for d = 3."""
        x = _as_points(x, self.dimension)
        a = self.radius
        if self.dimension == 1:
            y = x - self.center[0]
            return self._scale * np.sign(y) * _ref_derivative(self.profile, self.order, np.abs(y) / a) / a
        y = self._local(x)
        if self.profile == "product":
            b = a / math.sqrt(3.0)
            vals = [_ref_value("standard_mollifier", 0, np.abs(y[..., j]) / b) for j in range(3)]
            ders = [np.sign(y[..., j]) * _ref_derivative("standard_mollifier", 0, np.abs(y[..., j]) / b) / b
                    for j in range(3)]
            g = np.stack([ders[0] * vals[1] * vals[2],
                          vals[0] * ders[1] * vals[2],
                          vals[0] * vals[1] * ders[2]], axis=-1)
        else:
            r = np.sqrt(np.sum(y * y, axis=-1))
            d = _ref_derivative(self.profile, self.order, r / a) / a
            with np.errstate(invalid="ignore", divide="ignore"):
                g = np.where(r[..., None] > 0, y * (d / np.where(r > 0, r, 1.0))[..., None], 0.0)
        R = self._rot()
        if R is not None:
            g = g @ R.T
        return self._scale * g

    def shifted(self, s) -> "BumpFunction":
        s = np.broadcast_to(np.asarray(s, dtype=float), (self.dimension,))
        return BumpFunction(self.dimension, tuple(np.asarray(self.center) + s), self.radius,
                            self.amplitude, self.profile, self.order, self.rotation, self.normalized)

    def reflected(self) -> "BumpFunction":
        """The reflection ``x -> f(-x)``.

        All profiles are even in the local coordinates, so only the center moves.
        """
        return BumpFunction(self.dimension, tuple(-np.asarray(self.center)), self.radius,
                            self.amplitude, self.profile, self.order, self.rotation, self.normalized)

    # transforms

    def fourier(self, p):
        """Fourier image at p (scalar or array; trailing axis 3 for d = 3).

        Complex arguments are accepted (the image is entire).
        """
        a = self.radius
        if self.dimension == 1:
            p = np.asarray(p)
            ph = np.exp(-1j * p * self.center[0])
            return self._scale * a * ph * _ref_transform_1d(self.profile, self.order, a * p)
        p = np.asarray(p)
        if p.shape[-1] != 3:
            raise ValueError("momentum must have trailing dimension 3")
        c = np.asarray(self.center)
        ph = np.exp(-1j * (p @ c))
        if self.profile == "product":
            R = self._rot()
            q = p if R is None else p @ R
            b = a / math.sqrt(3.0)
            v = np.ones(q.shape[:-1], dtype=complex if np.iscomplexobj(q) else float)
            for j in range(3):
                v = v * b * _ref_transform_1d("standard_mollifier", 0, b * q[..., j])
            return self._scale * ph * v
        k = np.sqrt(np.sum(p * p, axis=-1))
        return self._scale * a ** 3 * ph * _ref_transform_3d(self.profile, self.order, a * k)

    def spectral_mean(self, rho):
        rho = np.asarray(rho, dtype=float)
        a = self.radius
        if self.dimension == 1:
            return self._scale * a * np.cos(rho * self.center[0]) * _ref_transform_1d(
                self.profile, self.order, a * rho)
        if self.is_isotropic:
            cn = float(np.linalg.norm(self.center))
            return (self._scale * a ** 3 * spherical_j(0, rho * cn)
                    * _ref_transform_3d(self.profile, self.order, a * rho))
        return _spectral_mean_from_average(self, rho)


@dataclass(frozen=True)
class Combination(TestFunction):
    """Finite linear combination ``sum c_i f_i`` of bumps of one dimension."""

    terms: tuple = ()

    def __post_init__(self):
        dims = {f.dimension for _, f in self.terms}
        if len(dims) > 1:
            raise ValueError("cannot combine test functions of different dimension")

    @classmethod
    def of(cls, f) -> "Combination":
        if isinstance(f, Combination):
            return f
        return cls(((1.0, f),))

    @property
    def dimension(self) -> int:
        return self.terms[0][1].dimension if self.terms else 1

    @property
    def balls(self) -> list:
        return [b for _, f in self.terms for b in f.balls]

    @property
    def is_radial(self) -> bool:
        return all(f.is_radial for _, f in self.terms)

    def __call__(self, x):
        return sum(c * f(x) for c, f in self.terms)

    def gradient(self, x):
        return sum(c * f.gradient(x) for c, f in self.terms)

    def fourier(self, p):
        return sum(c * f.fourier(p) for c, f in self.terms)

    def shifted(self, s) -> "Combination":
        return Combination(tuple((c, f.shifted(s)) for c, f in self.terms))

    def reflected(self) -> "Combination":
        return Combination(tuple((c, f.reflected()) for c, f in self.terms))

    def spectral_mean(self, rho):
        return sum(c * f.spectral_mean(rho) for c, f in self.terms)

    def __add__(self, other):
        if isinstance(other, (int, float)) and other == 0:
            return self
        if not isinstance(other, TestFunction):
            return NotImplemented
        return Combination(self.terms + Combination.of(other).terms)

    def __mul__(self, c):
        if not isinstance(c, (int, float, complex, np.number)):
            return NotImplemented
        return Combination(tuple((c * k, f) for k, f in self.terms))

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# Fourier image wrapper


@dataclass(frozen=True)
class FourierImage:
    """Numerically evaluated Fourier transform of a test function.

    Values are computed on demand with composite Gauss-Legendre rules whose
    panel count grows with |p|, keeping at most 8 radians of phase per
    40-point panel.  Absolute accuracy is near ``1e-16 * int|f|``.
    """

    source: TestFunction
    convention: dict = field(default_factory=lambda: dict(FOURIER_CONVENTION), compare=False)

    def value(self, p):
        return self.source.fourier(p)

    __call__ = value

    def spectral_mean(self, rho):
        return self.source.spectral_mean(rho)


def evaluate(f: TestFunction, x):
    """Value of the test function at x."""
    return f(x)


def fourier(f: TestFunction, p):
    """Fourier image ``int f(x) exp(-i x.p) dx``."""
    return f.fourier(p)


# ---------------------------------------------------------------------------
# Spherical averages


def sphere_rule(n_mu: int, n_phi: int, mu0: float = -1.0):
    """Nodes and weights for the mean over the unit sphere restricted to
    ``cos(theta) >= mu0`` (pole on the z axis).

    Gauss-Legendre in ``mu = cos(theta)`` on [mu0, 1] times the trapezoid rule
    in azimuth.  Weights sum to ``(1 - mu0) / 2``, the fraction of the sphere
    covered.
    """
    mu0 = float(np.clip(mu0, -1.0, 1.0))
    xg, wg = np.polynomial.legendre.leggauss(n_mu)
    mu = 0.5 * (1.0 - mu0) * xg + 0.5 * (1.0 + mu0)
    wmu = 0.25 * (1.0 - mu0) * wg  # includes the 1/2 of the mean over mu
    ph = 2.0 * math.pi * (np.arange(n_phi) + 0.5) / n_phi
    st = np.sqrt(np.maximum(0.0, 1.0 - mu * mu))
    nodes = np.stack([
        st[:, None] * np.cos(ph)[None, :],
        st[:, None] * np.sin(ph)[None, :],
        np.broadcast_to(mu[:, None], (n_mu, n_phi)),
    ], axis=-1).reshape(-1, 3)
    w = np.repeat(wmu / n_phi, n_phi)
    return nodes, w


def _frame(axis):
    """Orthonormal matrix whose third column is ``axis``."""
    e3 = np.asarray(axis, dtype=float)
    e3 = e3 / np.linalg.norm(e3)
    k = int(np.argmin(np.abs(e3)))
    seed = np.zeros(3)
    seed[k] = 1.0
    e1 = seed - (seed @ e3) * e3
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(e3, e1)
    return np.column_stack([e1, e2, e3])


_MU_ORDERS = (24, 48, 96, 192, 384)
_PHI_ORDERS = (16, 32, 64, 128, 256)
# azimuthal nodes for isotropic bumps: exact for weights of degree <= 2
_PHI_ISO = 4
# sphere-rule points evaluated at once; bounds the working memory
_POINT_BUDGET = 200_000


def _cap_start(f: BumpFunction, r):
    """Lower limit mu0 of the cap of the sphere |x| = r meeting the support."""
    cn = float(np.linalg.norm(f.center))
    a = f.radius
    if cn == 0.0:
        return np.where(r < a, -1.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = (r * r + cn * cn - a * a) / (2.0 * r * cn)
    return np.clip(np.where(r > 0, mu0, -1.0), -1.0, 1.0)


def _cap_rule_means(f, r, mu0, frame, n_mu, n_phi, weights, derivative):
    xg, wg = np.polynomial.legendre.leggauss(n_mu)
    m0 = mu0[:, None]
    mu = 0.5 * (1.0 - m0) * xg[None, :] + 0.5 * (1.0 + m0)
    wmu = 0.25 * (1.0 - m0) * wg[None, :] / n_phi
    ph = 2.0 * math.pi * (np.arange(n_phi) + 0.5) / n_phi
    st = np.sqrt(np.maximum(0.0, 1.0 - mu * mu))
    loc = np.stack([
        st[:, :, None] * np.cos(ph)[None, None, :],
        st[:, :, None] * np.sin(ph)[None, None, :],
        np.broadcast_to(mu[:, :, None], mu.shape + (n_phi,)),
    ], axis=-1)
    om = loc @ frame.T
    pts = r[:, None, None, None] * om
    if derivative:
        g = np.sum(f.gradient(pts) * om, axis=-1)
    else:
        g = f(pts)
    return np.stack([np.einsum("ij,ijk->i", wmu, g * wf(om)) for wf in weights])


def _sphere_means(f: BumpFunction, r, weights, tol, derivative=False):
    """Sphere means of ``g(r w) * weight_k(w)`` with ``g = f`` or ``grad f . w``.

    Returns an array of shape ``(len(weights), len(r))``.  The rule is refined
    per radius until two consecutive orders agree to ``tol``.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    c = np.asarray(f.center)
    cn = float(np.linalg.norm(c))
    frame = _frame(c) if cn > 0 else np.eye(3)
    out = np.zeros((len(weights), len(r)))
    mu0 = _cap_start(f, r)
    todo = np.flatnonzero(mu0 < 1.0)
    prev = None
    for level in range(len(_MU_ORDERS)):
        if len(todo) == 0:
            break
        n_mu = _MU_ORDERS[level]
        n_phi = _PHI_ISO if f.is_isotropic else _PHI_ORDERS[level]
        cur = np.empty((len(weights), len(todo)))
        step = max(1, _POINT_BUDGET // (n_mu * n_phi))
        for i in range(0, len(todo), step):
            idx = todo[i:i + step]
            cur[:, i:i + step] = _cap_rule_means(f, r[idx], mu0[idx], frame, n_mu, n_phi,
                                                 weights, derivative)
        out[:, todo] = cur
        if prev is not None:
            done = np.all(np.abs(cur - prev) <= tol, axis=0)
            keep = ~done
            todo = todo[keep]
            prev = cur[:, keep]
        else:
            prev = cur
    return out


def _one(om):
    return np.ones(om.shape[:-1])


def _terms(f):
    return f.terms if isinstance(f, Combination) else ((1.0, f),)


def spherical_average(f: TestFunction, r, tol: float = 1e-13):
    """Mean of f over the sphere of radius r about the origin.

    Radial bumps use their profile directly.  Otherwise the sphere rule is
    aligned with the bump center and restricted to the cap that meets the
    support; its order is doubled until two consecutive orders agree to
    ``tol``.
    """
    if f.dimension != 3:
        raise ValueError("spherical averages are defined for d = 3")
    r_arr = np.abs(np.asarray(r, dtype=float))
    flat = np.atleast_1d(r_arr).ravel()
    total = np.zeros(len(flat))
    for coef, b in _terms(f):
        if b.is_radial:
            pts = np.zeros((len(flat), 3))
            pts[:, 2] = flat
            total += coef * b(pts)
        else:
            total += coef * _sphere_means(b, flat, [_one], tol)[0]
    out = total.reshape(r_arr.shape)
    return float(out) if out.ndim == 0 else out


def _average_derivative(f: TestFunction, r, tol: float = 1e-13):
    """d/dr of the spherical average: mean of grad f(r w) . w."""
    r_in = np.asarray(r, dtype=float)
    sgn = np.sign(r_in)
    flat = np.atleast_1d(np.abs(r_in)).ravel()
    total = np.zeros(len(flat))
    for coef, b in _terms(f):
        if b.is_radial:
            pts = np.zeros((len(flat), 3))
            pts[:, 2] = flat
            total += coef * b.gradient(pts)[:, 2]
            continue
        total += coef * _sphere_means(b, flat, [_one], tol, derivative=True)[0]
    out = total.reshape(r_in.shape) * np.where(sgn == 0, 1.0, sgn)
    return float(out) if out.ndim == 0 else out


def spherical_moments(f: TestFunction, r, tol: float = 1e-13):
    """Sphere means of ``f(r w)``, ``f(r w) w_j`` and ``f(r w) w_j w_k``.

    Returns
    -------
    m0 : ndarray, shape (n,)
    m1 : ndarray, shape (n, 3)
    m2 : ndarray, shape (n, 3, 3)
    """
    if f.dimension != 3:
        raise ValueError("spherical moments are defined for d = 3")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    n = len(r)
    m0 = np.zeros(n)
    m1 = np.zeros((n, 3))
    m2 = np.zeros((n, 3, 3))
    pairs = [(j, k) for j in range(3) for k in range(j, 3)]
    for coef, b in _terms(f):
        if b.is_radial:
            pts = np.zeros((n, 3))
            pts[:, 2] = r
            v = b(pts)
            m0 += coef * v
            for j in range(3):
                m2[:, j, j] += coef * v / 3.0
            continue
        weights = [_one]
        weights += [(lambda om, j=j: om[..., j]) for j in range(3)]
        weights += [(lambda om, j=j, k=k: om[..., j] * om[..., k]) for j, k in pairs]
        vals = _sphere_means(b, r, weights, tol)
        m0 += coef * vals[0]
        m1 += coef * vals[1:4].T
        for idx, (j, k) in enumerate(pairs):
            m2[:, j, k] += coef * vals[4 + idx]
            if j != k:
                m2[:, k, j] += coef * vals[4 + idx]
    return m0, m1, m2


@lru_cache(maxsize=32)
def _average_grid(f: TestFunction, npan: int):
    """Spherical average of f on a GL grid spanning its radial extent."""
    lo, hi = f.radial_extent()
    e = np.linspace(lo, hi, npan + 1)
    mid = 0.5 * (e[:-1] + e[1:])
    half = 0.5 * (e[1:] - e[:-1])
    r = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    phi = spherical_average(f, r)
    return r, w, phi


def _spectral_mean_from_average(f: TestFunction, rho):
    """``4 pi int r^2 Phi(r) j0(rho r) dr`` for non-isotropic bumps."""
    rho = np.asarray(rho, dtype=float)
    flat = rho.ravel()
    out = np.empty(flat.shape)
    lo, hi = f.radial_extent()
    for i in range(0, len(flat), _CHUNK):
        blk = flat[i:i + _CHUNK]
        kmax = float(np.max(np.abs(blk), initial=0.0)) * (hi - lo)
        npan = max(16, _panels_for(kmax) // 4)
        r, w, phi = _average_grid(f, npan)
        out[i:i + _CHUNK] = spherical_j(0, np.multiply.outer(blk, r)) @ (4.0 * math.pi * w * r * r * phi)
    return out.reshape(rho.shape)


@lru_cache(maxsize=32)
def _moment_grid(f: TestFunction, npan: int):
    lo, hi = f.radial_extent()
    e = np.linspace(lo, hi, npan + 1)
    mid = 0.5 * (e[:-1] + e[1:])
    half = 0.5 * (e[1:] - e[:-1])
    r = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    m0, m1, m2 = spherical_moments(f, r)
    return r, w, m0, m1, m2


def spectral_moments(f: TestFunction, rho, sign: int = -1):
    """Sphere means of ``f^(sign rho w)`` weighted by 1, ``w_j`` and ``w_j w_k``.

    With ``a = rho |x|`` and ``n = x / |x|`` the angular means of the plane
    wave are ``j0(a)``, ``-i sign' j1(a) n_j`` and
    ``delta_jk j1(a)/a - j2(a) n_j n_k``, so all three reduce to radial
    integrals of the position-space moments from :func:`spherical_moments`.
    The default ``sign=-1`` gives the moments of ``f^(-p)``, the combination
    that pairs with a symbol.

    Returns
    -------
    F0 : ndarray, shape (n,)
    F1 : ndarray, shape (n, 3), complex
    F2 : ndarray, shape (n, 3, 3)
    """
    if f.dimension != 3:
        raise ValueError("spectral moments are defined for d = 3")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    n = len(rho)
    if f.is_radial:
        f0 = np.asarray(f.spectral_mean(rho), dtype=float)
        f2 = f0[:, None, None] * np.eye(3)[None] / 3.0
        return f0, np.zeros((n, 3), dtype=complex), f2
    lo, hi = f.radial_extent()
    f0 = np.empty(n)
    f1 = np.empty((n, 3), dtype=complex)
    f2 = np.empty((n, 3, 3))
    eye = np.eye(3)
    for i in range(0, n, _CHUNK):
        blk = rho[i:i + _CHUNK]
        kmax = float(np.max(np.abs(blk), initial=0.0)) * (hi - lo)
        r, w, m0, m1, m2 = _moment_grid(f, max(16, _panels_for(kmax) // 4))
        a = np.multiply.outer(np.abs(blk), r)
        base = 4.0 * math.pi * w * r * r
        j1 = spherical_j(1, a)
        j2 = spherical_j(2, a)
        # j1(a)/a with its limit 1/3 at a = 0
        safe = np.where(a == 0, 1.0, a)
        j1a = np.where(a == 0, 1.0 / 3.0, j1 / safe)
        f0[i:i + _CHUNK] = spherical_j(0, a) @ (base * m0)
        # f^(s rho w) carries exp(-i s rho w.x)
        f1[i:i + _CHUNK] = -1j * sign * np.sign(blk)[:, None] * (j1 @ (base[:, None] * m1))
        f2[i:i + _CHUNK] = ((j1a @ (base * m0))[:, None, None] * eye
                            - np.einsum("nr,rjk->njk", j2, base[:, None, None] * m2))
    return f0, f1, f2


class RadialProfile:
    """Spherical average ``Phi(r)`` of a 3D test function with its derivative.

    ``value`` is extended evenly and ``derivative`` oddly to negative r.
    """

    def __init__(self, source: TestFunction, tol: float = 1e-13):
        if source.dimension != 3:
            raise ValueError("radial profiles are defined for d = 3")
        self.source = source
        self.tol = tol
        self.inner_radius, self.outer_radius = source.radial_extent()

    def value(self, r):
        return np.asarray(spherical_average(self.source, np.abs(np.asarray(r, dtype=float)), self.tol))

    __call__ = value

    def derivative(self, r):
        return np.asarray(_average_derivative(self.source, r, self.tol))

    @property
    def breakpoints(self) -> tuple:
        return ()


def radial_profile(f: TestFunction, tol: float = 1e-13) -> RadialProfile:
    return RadialProfile(f, tol)
