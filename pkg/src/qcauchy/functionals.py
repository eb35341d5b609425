"""Quantum Cauchy functionals: position-space evaluation on bumps and the
momentum-space pairing used to validate it.

The forward functional of kind ``(d, m)`` at time t is the inverse Fourier
transform of ``exp(i t sigma(p))`` with ``sigma = sqrt(m^2 + |p|^2)``; its
value on a test function is

    <C, phi> = (2 pi)^-d int exp(i t sigma(p)) phi^(-p) dp.

Position-space forms implemented here (``s = +1`` forward, ``-1`` conjugate,
``B`` the mass factors of :mod:`qcauchy.specfun` on the matching branch):

1D:  ``(phi(t) + phi(-t))/2 + s (i/pi) PV int t B phi / (t^2 - x^2) dx``

3D:  ``d/dr[r B Phi]_(r=t) - s (i/pi^2) Ireg[B Phi]`` where Phi is the
spherical average and Ireg the regularized integral of
``t / (t^2 - r^2)^2`` (see :func:`qcauchy.quad.regularized_3d_kernel_integral`).
With ``B = 1`` the point term is ``Phi(t) + t Phi'(t)``; the mass factor adds
``-(m t)^2 Phi(t) / 2``.  Signs and point terms are the ones that reproduce
the momentum-space pairing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .quad import (
    ConvergenceError,
    IntegralResult,
    QuadratureConfig,
    adaptive,
    combine,
    oscillatory_halfline,
    pv_integral,
    regularized_3d_kernel_integral,
)
from .testfn import RadialProfile, TestFunction

__all__ = [
    "FunctionalKind",
    "FunctionalValue",
    "KINDS",
    "cauchy_density_real_time",
    "integrate_density",
    "qc1d_apply",
    "qc3d_apply",
    "qc1d_massive_apply",
    "qc3d_massive_apply",
    "conjugate_apply",
    "evaluate",
    "apply",
    "momentum_pairing",
    "compose_1d",
    "MassWeight3D",
]

FUNCTIONAL_CONFIG = QuadratureConfig(abs_tol=1e-13, rel_tol=1e-12)
ORACLE_CONFIG = QuadratureConfig(abs_tol=1e-14, rel_tol=1e-12)
# rho^2 F(rho) in 3D reaches a roundoff floor of about 1e-18 rho^2 near
# rho ~ 1e3, so the 3D oracle cannot resolve tails much below 1e-10
ORACLE_CONFIG_3D = QuadratureConfig(abs_tol=1e-11, rel_tol=1e-9, truncation_radius=2000.0)


@dataclass(frozen=True)
class FunctionalKind:
    """Which functional: dimension, mass and time direction.

    ``time_sign="forward"`` is C_it (symbol ``exp(+i t sigma)``),
    ``"conjugate"`` is its complex conjugate C_-it.
    """

    dimension: int
    mass: float = 0.0
    time_sign: str = "forward"

    def __post_init__(self):
        if self.dimension not in (1, 3):
            raise ValueError("dimension must be 1 or 3")
        if not (math.isfinite(self.mass) and self.mass >= 0):
            raise ValueError("mass must be finite and non-negative")
        if self.time_sign not in ("forward", "conjugate"):
            raise ValueError("time_sign must be 'forward' or 'conjugate'")
        object.__setattr__(self, "mass", float(self.mass))

    @property
    def sign(self) -> int:
        return 1 if self.time_sign == "forward" else -1

    @property
    def massive(self) -> bool:
        return self.mass > 0

    @property
    def name(self) -> str:
        base = "%dd_%s" % (self.dimension, "massive" if self.massive else "massless")
        return base if self.sign > 0 else base + "_conjugate"

    def conjugate(self) -> "FunctionalKind":
        other = "conjugate" if self.sign > 0 else "forward"
        return FunctionalKind(self.dimension, self.mass, other)

    def sigma(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.sqrt(self.mass ** 2 + rho * rho) if self.massive else np.abs(rho)

    def symbol(self, t: float, rho):
        """``exp(+-i t sigma(rho))``."""
        return np.exp(1j * self.sign * t * self.sigma(rho))


KINDS = {
    "1d_massless": FunctionalKind(1, 0.0),
    "3d_massless": FunctionalKind(3, 0.0),
    "1d_massive": FunctionalKind(1, 1.0),
    "3d_massive": FunctionalKind(3, 1.0),
}


@dataclass(frozen=True)
class FunctionalValue:
    """``<C, phi>`` split into its point (sphere) term and regularized integral.

    ``value`` is always ``delta_part + kernel_part``.
    """

    delta_part: complex
    kernel_part: complex
    error_estimate: float
    kind: FunctionalKind | None = None
    t: float | None = None
    method: str = ""
    evaluations: int = 0
    converged: bool = True
    details: dict = field(default_factory=dict, compare=False)

    @property
    def value(self) -> complex:
        return self.delta_part + self.kernel_part

    def conj(self) -> "FunctionalValue":
        kind = None if self.kind is None else self.kind.conjugate()
        return FunctionalValue(np.conj(self.delta_part), np.conj(self.kernel_part), self.error_estimate,
                               kind, self.t, self.method + "+conjugation", self.evaluations,
                               self.converged, dict(self.details))

    def as_dict(self) -> dict:
        return {
            "kind": None if self.kind is None else self.kind.name,
            "t": self.t,
            "value": self.value,
            "delta_part": self.delta_part,
            "kernel_part": self.kernel_part,
            "error_estimate": self.error_estimate,
            "method": self.method,
            "converged": self.converged,
        }


def _check_t(t):
    if not (isinstance(t, (int, float, np.floating, np.integer)) and math.isfinite(t) and t > 0):
        raise ValueError("t must be a positive finite time (got %r)" % (t,))
    return float(t)


def _check_dim(phi: TestFunction, d: int):
    if phi.dimension != d:
        raise ValueError("expected a %dD test function, got %dD" % (d, phi.dimension))


# ---------------------------------------------------------------------------
# real-time densities


def cauchy_density_real_time(t: float, dimension: int = 1):
    """Transition density of the Cauchy process at real time t.

    Returns a vectorized callable of x (1D) or r = |x| (3D):
    ``t / (pi (t^2 + x^2))`` and ``t / (pi^2 (t^2 + r^2)^2)``.  Its Fourier
    transform is ``exp(-t |p|)``.
    """
    t = _check_t(t)
    if dimension == 1:
        return lambda x: t / (math.pi * (t * t + np.asarray(x, dtype=float) ** 2))
    if dimension == 3:
        return lambda r: t / (math.pi ** 2 * (t * t + np.asarray(r, dtype=float) ** 2) ** 2)
    raise ValueError("dimension must be 1 or 3")


def integrate_density(t: float, dimension: int = 1, phi: TestFunction | None = None,
                      config: QuadratureConfig | None = None) -> IntegralResult:
    """Integral of the real-time density over all space, or against ``phi``."""
    cfg = config or FUNCTIONAL_CONFIG
    k = cauchy_density_real_time(t, dimension)
    if dimension == 1:
        if phi is None:
            return adaptive(k, -np.inf, np.inf, cfg)
        _check_dim(phi, 1)
        lo, hi = phi.support_interval()
        return adaptive(lambda x: k(x) * phi(x), lo, hi, cfg)
    if phi is None:
        return adaptive(lambda r: 4 * math.pi * r * r * k(r), 0.0, np.inf, cfg)
    _check_dim(phi, 3)
    prof = RadialProfile(phi)
    lo, hi = prof.inner_radius, prof.outer_radius
    return adaptive(lambda r: 4 * math.pi * r * r * k(r) * prof.value(r), lo, hi, cfg)


# ---------------------------------------------------------------------------
# position-space evaluation


def _finish(res, delta, kind, t, method, strict, details=None):
    fv = FunctionalValue(complex(delta), complex(res.value), res.error_estimate, kind, t, method,
                         res.evaluations, res.converged, details or {})
    if strict and not fv.converged:
        raise ConvergenceError("%s at t=%g did not converge (error estimate %.3g)"
                               % (kind.name, t, fv.error_estimate))
    return fv


def _eval_1d(kind: FunctionalKind, t: float, phi: TestFunction, cfg, strict=True) -> FunctionalValue:
    lo, hi = phi.support_interval()
    R = max(abs(lo), abs(hi), t) + cfg.pv_window
    dom = (-R, R)
    pts = sorted(p for p in {lo, hi, -t, t} if -R < p < R)
    s = kind.sign
    if kind.massive:
        m = kind.mass
        br = -s  # forward functional uses the -i m l branch

        def g(x):
            return specfun.b_factor_1d(t, x, m, br) * phi(x)
    else:
        g = phi
    delta = 0.5 * (float(phi(t)) + float(phi(-t)))
    # t/(t^2 - x^2) = (1/(t - x) + 1/(t + x)) / 2 and PV int g/(t+x) = -PV int g/(-t-x)
    right = pv_integral(g, t, dom, cfg, pts)
    left = pv_integral(g, -t, dom, cfg, pts)
    c = s * 1j / (2 * math.pi)
    res = combine([right, left], [c, -c])
    return _finish(res, delta, kind, t, "pole_subtraction", strict)


class MassWeight3D:
    """Mass factor ``B(t, r)`` of the 3D kernel with its radial derivative."""

    def __init__(self, t: float, m: float, branch: int = -1):
        self.t, self.m, self.branch = t, m, branch

    def value(self, r):
        return specfun.b_factor_3d(self.t, np.asarray(r, dtype=float), self.m, self.branch)

    def derivative(self, r):
        return specfun.b_factor_3d_dr(self.t, np.asarray(r, dtype=float), self.m, self.branch)


def _eval_3d(kind: FunctionalKind, t: float, phi: TestFunction, cfg, strict=True) -> FunctionalValue:
    prof = RadialProfile(phi)
    s = kind.sign
    ph = float(prof.value(np.array([t]))[0])
    dph = float(prof.derivative(np.array([t]))[0])
    # point term d/dr [r B Phi] at r = t, with B(t) = 1 and B'(t) = -m^2 t / 2
    delta = ph + t * dph
    weight = None
    if kind.massive:
        m = kind.mass
        delta -= 0.5 * (m * t) ** 2 * ph
        weight = MassWeight3D(t, m, -s)
    ireg = regularized_3d_kernel_integral(prof, t, weight, cfg)
    res = ireg.scaled(-s * 1j / math.pi ** 2)
    return _finish(res, delta, kind, t, "radial_partial_fractions", strict,
                   {"Phi(t)": ph, "dPhi(t)": dph})


def evaluate(kind: FunctionalKind, t: float, phi: TestFunction,
             config: QuadratureConfig | None = None, strict: bool = True) -> FunctionalValue:
    """Position-space value of the functional ``kind`` at time t on ``phi``.

    Both time directions are evaluated directly from their own formulas (no
    conjugation), which makes this the independent route for conjugates.
    """
    t = _check_t(t)
    _check_dim(phi, kind.dimension)
    cfg = config or FUNCTIONAL_CONFIG
    if kind.dimension == 1:
        return _eval_1d(kind, t, phi, cfg, strict)
    return _eval_3d(kind, t, phi, cfg, strict)


def qc1d_apply(t: float, phi: TestFunction, config: QuadratureConfig | None = None) -> FunctionalValue:
    """``<C_it, phi>`` for the massless 1D functional.

    Examples
    --------
    >>> from qcauchy.testfn import BumpFunction
    >>> v = qc1d_apply(1.0, BumpFunction(1, (0.0,), 1.0))
    >>> round(v.delta_part, 12)
    0j
    """
    return evaluate(FunctionalKind(1, 0.0), t, phi, config)


def qc3d_apply(t: float, phi: TestFunction, config: QuadratureConfig | None = None) -> FunctionalValue:
    """``<C_it, phi>`` for the massless 3D functional."""
    return evaluate(FunctionalKind(3, 0.0), t, phi, config)


def _check_m(m):
    if not (math.isfinite(m) and m > 0):
        raise ValueError("mass must be positive for the massive functionals (got %r)" % (m,))
    return float(m)


def qc1d_massive_apply(t: float, m: float, phi: TestFunction,
                       config: QuadratureConfig | None = None) -> FunctionalValue:
    """``<C^m_it, phi>`` in 1D: massless kernel times ``B = z K1(z)``."""
    return evaluate(FunctionalKind(1, _check_m(m)), t, phi, config)


def qc3d_massive_apply(t: float, m: float, phi: TestFunction,
                       config: QuadratureConfig | None = None) -> FunctionalValue:
    """``<C^m_it, phi>`` in 3D: massless kernel times ``B = z^2 K2(z) / 2``."""
    return evaluate(FunctionalKind(3, _check_m(m)), t, phi, config)


def apply(kind: FunctionalKind, t: float, phi: TestFunction,
          config: QuadratureConfig | None = None) -> FunctionalValue:
    """Evaluate any kind; the conjugate kinds go through :func:`conjugate_apply`."""
    if kind.sign < 0:
        return conjugate_apply(kind.conjugate(), t, kind.mass, phi, config)
    return evaluate(kind, t, phi, config)


def _is_real(phi: TestFunction) -> bool:
    terms = getattr(phi, "terms", None)
    if terms is None:
        return True
    return all(np.isreal(c) for c, _ in terms)


def conjugate_apply(kind: FunctionalKind, t: float, m: float, phi: TestFunction,
                    config: QuadratureConfig | None = None) -> FunctionalValue:
    """``<conj C, phi>``: complex conjugate of the forward value for real phi.

    ``kind`` names the forward functional (its ``time_sign`` is ignored) and
    ``m`` overrides its mass.  For complex-valued combinations the conjugate
    formula is evaluated directly.
    """
    fwd = FunctionalKind(kind.dimension, m, "forward")
    if _is_real(phi):
        return evaluate(fwd, t, phi, config).conj()
    return evaluate(fwd.conjugate(), t, phi, config)


# ---------------------------------------------------------------------------
# momentum side


def momentum_pairing(kind: FunctionalKind, t: float, phi: TestFunction, order: int = 0,
                     config: QuadratureConfig | None = None, method: str | None = None) -> IntegralResult:
    """``(2 pi)^-d int (i s sigma)^order exp(i s t sigma(p)) phi^(-p) dp``.

    The symbol is radial, so only the sphere mean F of phi^ enters:
    ``c_d int_0^inf rho^(d-1) (...) F(rho) d rho`` with ``c_1 = 1/pi``,
    ``c_3 = 1/(2 pi^2)``.  The factor ``exp(i s t rho)`` is handed to
    :func:`qcauchy.quad.oscillatory_halfline`; the rest is smooth and decays
    faster than any power.  ``order = 1`` gives the time derivative.
    """
    t = _check_t(t)
    _check_dim(phi, kind.dimension)
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    d = kind.dimension
    cfg = config or (ORACLE_CONFIG if d == 1 else ORACLE_CONFIG_3D)
    s = kind.sign
    m = kind.mass
    cd = 1.0 / math.pi if d == 1 else 1.0 / (2.0 * math.pi ** 2)

    def g(rho):
        rho = np.asarray(rho, dtype=float)
        sig = kind.sigma(rho)
        # sigma - rho = m^2 / (sigma + rho), stable for large rho
        extra = np.exp(1j * s * t * (m * m / (sig + rho))) if kind.massive else 1.0
        val = cd * extra * phi.spectral_mean(rho)
        if d == 3:
            val = val * rho * rho
        if order == 1:
            val = val * (1j * s * sig)
        return val

    _, hi = phi.radial_extent() if d == 3 else (0.0, max(abs(v) for v in phi.support_interval()))
    # g oscillates with frequency up to the support radius
    scale = math.pi / max(hi, 1e-3)
    return oscillatory_halfline(g, s * t, "exp", cfg, method, scale=scale)


# ---------------------------------------------------------------------------
# semigroup composition (1D)


def compose_1d(t: float, tau: float, phi: TestFunction, R: float = 100.0, mass: float = 0.0,
               config: QuadratureConfig | None = None):
    """``<C_(i tau), psi>`` with ``psi(y) = <C_(i (t - tau)), phi(y + .)>`` on |y| <= R.

    Returns ``(value, truncation_bound)``.  The inner function decays like
    ``y^-2`` and so does the outer kernel; the discarded part is bounded by
    ``2 tau (t - tau) ||phi||_1 / (3 pi^2 R^3)`` in the massless case (the
    massive kernels decay exponentially outside the cone, so the same bound
    applies).
    """
    t = _check_t(t)
    tau = _check_t(tau)
    if not tau < t:
        raise ValueError("need 0 < tau < t")
    _check_dim(phi, 1)
    cfg = config or QuadratureConfig(abs_tol=1e-10, rel_tol=1e-9)
    inner_kind = FunctionalKind(1, mass)
    outer_kind = FunctionalKind(1, mass)
    rest = t - tau

    def psi(y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty(len(y), dtype=complex)
        for i, yi in enumerate(y):
            out[i] = evaluate(inner_kind, rest, phi.shifted(-yi), FUNCTIONAL_CONFIG).value
        return out

    delta = 0.5 * (psi(np.array([tau]))[0] + psi(np.array([-tau]))[0])
    dom = (-R, R)
    pts = [-tau, tau]
    lo, hi = phi.support_interval()
    pts += [p for p in (-hi - rest, -lo + rest, -hi + rest, -lo - rest) if -R < p < R]
    if outer_kind.massive:
        def g(y):
            return specfun.b_factor_1d(tau, y, mass, -1) * psi(y)
    else:
        g = psi
    right = pv_integral(g, tau, dom, cfg, pts)
    left = pv_integral(g, -tau, dom, cfg, pts)
    c = 1j / (2 * math.pi)
    res = combine([right, left], [c, -c])
    l1 = abs(adaptive(lambda x: np.abs(phi(x)), lo, hi, cfg).value)
    bound = 2.0 * tau * rest * l1 / (3.0 * math.pi ** 2 * R ** 3)
    fv = FunctionalValue(complex(delta), res.value, res.error_estimate, outer_kind, t, "composition",
                         res.evaluations, res.converged)
    return fv, bound
