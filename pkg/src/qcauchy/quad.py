"""Quadrature engines: adaptive Gauss-Kronrod, principal values, the radial
reduction of the 3D singular kernel and oscillatory half-line integrals.

Every engine returns an :class:`IntegralResult`.  Integrands are called with a
1D ``ndarray`` of nodes and must return an array of the same length (real or
complex).  Panel selection, bisection order and the final summation are all
deterministic, so results are bit-stable from run to run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "QuadratureConfig",
    "IntegralResult",
    "ConvergenceError",
    "MethodInapplicableError",
    "combine",
    "adaptive",
    "pv_integral",
    "pv_excision",
    "pv_second_order",
    "regularized_3d_kernel_integral",
    "oscillatory_halfline",
    "wynn_epsilon",
]

OSCILLATORY_METHODS = ("panel_series_acceleration", "complex_contour")


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and limits shared by all engines.

    Attributes
    ----------
    abs_tol, rel_tol : float
        Requested accuracy; an integral converges when its error estimate is
        below ``max(abs_tol, rel_tol * |value|)``.
    max_refinements : int
        Budget of panel bisections per adaptive integral.
    pv_window : float
        Minimum distance kept between a pole and the ends of the integration
        domain; the domain of a principal value is widened to honour it.
    truncation_radius : float
        Hard cap on the momentum cutoff of half-line integrals.
    oscillatory_method : str
        ``"panel_series_acceleration"`` or ``"complex_contour"``.
    """

    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    max_refinements: int = 4000
    pv_window: float = 0.5
    truncation_radius: float = 4000.0
    oscillatory_method: str = "panel_series_acceleration"

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_refinements < 0:
            raise ValueError("max_refinements must be non-negative")
        if not self.pv_window > 0:
            raise ValueError("pv_window must be positive")
        if not self.truncation_radius > 0:
            raise ValueError("truncation_radius must be positive")
        if self.oscillatory_method not in OSCILLATORY_METHODS:
            raise ValueError("unknown oscillatory_method %r" % (self.oscillatory_method,))

    def tolerance(self, value) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))

    def with_(self, **kw) -> "QuadratureConfig":
        return replace(self, **kw)


DEFAULT_CONFIG = QuadratureConfig()


class ConvergenceError(RuntimeError):
    """An integral did not reach its tolerance within the refinement budget."""


class MethodInapplicableError(ValueError):
    """The requested quadrature method cannot be applied to the integrand."""


@dataclass(frozen=True)
class IntegralResult:
    """Value of an integral with its error estimate.

    ``tail_bound`` is the part of ``error_estimate`` attributed to truncating
    an infinite range (zero for finite ranges).
    """

    value: complex
    error_estimate: float
    evaluations: int
    converged: bool
    tail_bound: float = 0.0
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be non-negative")

    def require(self, what: str = "integral") -> "IntegralResult":
        """Return self, or raise :class:`ConvergenceError` if not converged."""
        if not self.converged:
            raise ConvergenceError(
                "%s did not converge (error estimate %.3g)" % (what, self.error_estimate)
            )
        return self

    def scaled(self, c) -> "IntegralResult":
        return combine([self], [c])

    def __add__(self, other: "IntegralResult") -> "IntegralResult":
        return combine([self, other])

    def __neg__(self) -> "IntegralResult":
        return combine([self], [-1.0])

    def __sub__(self, other: "IntegralResult") -> "IntegralResult":
        return combine([self, other], [1.0, -1.0])


def combine(results: Sequence[IntegralResult], coeffs: Iterable | None = None) -> IntegralResult:
    """Linear combination of results with errors added in absolute value."""
    results = list(results)
    coeffs = [1.0] * len(results) if coeffs is None else list(coeffs)
    value = 0j
    err = tail = 0.0
    nev = 0
    ok = True
    for c, r in zip(coeffs, results):
        value += c * r.value
        err += abs(c) * r.error_estimate
        tail += abs(c) * r.tail_bound
        nev += r.evaluations
        ok = ok and r.converged
    return IntegralResult(value, err, nev, ok, tail)


# 21-point Gauss-Kronrod rule; nodes are the non-negative abscissae.
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])
# full symmetric node/weight vectors
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(21)
_GW[1:10:2] = _WG
_GW[11:20:2] = _WG[::-1]
_EPS = np.finfo(float).eps


def _gk21(f, lo, hi):
    """Apply GK21 on panels ``[lo_i, hi_i]``; return (values, errors, complex?)."""
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    x = (c[:, None] + h[:, None] * _NODES[None, :]).ravel()
    fx = np.asarray(f(x))
    if fx.shape != x.shape:
        fx = np.broadcast_to(fx, x.shape)
    fx = fx.reshape(len(lo), 21)
    if not np.all(np.isfinite(fx)):
        raise FloatingPointError("integrand returned non-finite values")
    k = (fx @ _KW) * h
    g = (fx @ _GW) * h
    mean = k / (2.0 * h)[:]
    resasc = (np.abs(fx - mean[:, None]) @ _KW) * np.abs(h)
    resabs = (np.abs(fx) @ _KW) * np.abs(h)
    err = np.abs(k - g)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where(resasc > 0, scaled, err)
    err = np.maximum(err, 50.0 * _EPS * resabs)
    return k, err, resabs


def _map_infinite(f, a, b):
    """Return an integrand on a finite interval equivalent to ``f`` on (a, b)."""
    if np.isfinite(a) and np.isfinite(b):
        return f, a, b, None
    if np.isfinite(a):  # [a, inf): x = a + u/(1-u)
        def g(u):
            v = 1.0 - u
            return f(a + u / v) / (v * v)
        return g, 0.0, 1.0, lambda p: (p - a) / (1.0 + p - a)
    if np.isfinite(b):  # (-inf, b]: x = b - u/(1-u), reversed orientation
        def g(u):
            v = 1.0 - u
            return f(b - u / v) / (v * v)
        return g, 0.0, 1.0, lambda p: (b - p) / (1.0 + b - p)
    # (-inf, inf): x = u / (1 - u^2)
    def g(u):
        v = 1.0 - u * u
        return f(u / v) * (1.0 + u * u) / (v * v)
    return g, -1.0, 1.0, lambda p: (
        0.0 if p == 0 else (-1.0 + math.sqrt(1.0 + 4.0 * p * p)) / (2.0 * p)
    )


def adaptive(
    f: Callable,
    a: float,
    b: float,
    config: QuadratureConfig | None = None,
    points: Iterable[float] = (),
    abs_tol: float | None = None,
    rel_tol: float | None = None,
) -> IntegralResult:
    """Globally adaptive 21-point Gauss-Kronrod integration of ``f`` over [a, b].

    Parameters
    ----------
    f : callable
        Vectorized integrand.
    a, b : float
        Limits; either may be infinite.
    config : QuadratureConfig, optional
    points : iterable of float
        Interior breakpoints (kinks, integrable singularities).
    abs_tol, rel_tol : float, optional
        Override the tolerances of ``config``.

    Notes
    -----
    Each sweep bisects the quarter of the panels with the largest error
    estimates (at least one, at most 32).  The schedule does not depend on the
    tolerance, so tightening the tolerance only extends the same sequence of
    refinements.
    """
    cfg = config or DEFAULT_CONFIG
    atol = cfg.abs_tol if abs_tol is None else abs_tol
    rtol = cfg.rel_tol if rel_tol is None else rel_tol
    if a == b:
        return IntegralResult(0j, 0.0, 0, True)
    if a > b:
        r = adaptive(f, b, a, cfg, points, atol, rtol)
        return combine([r], [-1.0])
    if np.isnan(a) or np.isnan(b):
        raise ValueError("NaN integration limit")
    g, lo0, hi0, pmap = _map_infinite(f, a, b)
    pts = [p for p in points if a < p < b]
    if pmap is not None:
        pts = [pmap(p) for p in pts]
    edges = np.unique(np.concatenate([[lo0, hi0], np.asarray(pts, dtype=float)]))
    lo = edges[:-1].copy()
    hi = edges[1:].copy()
    vals, errs, _ = _gk21(g, lo, hi)
    nev = 21 * len(lo)
    refinements = 0
    converged = False
    while True:
        total = vals.sum()
        err = float(errs.sum())
        if err <= max(atol, rtol * abs(total)):
            converged = True
            break
        if refinements >= cfg.max_refinements:
            break
        n = len(lo)
        k = min(32, max(1, n // 4), cfg.max_refinements - refinements)
        order = np.lexsort((lo, -errs))
        pick = order[:k]
        mid = 0.5 * (lo[pick] + hi[pick])
        if np.any((mid <= lo[pick]) | (mid >= hi[pick])):
            break  # panels cannot be split further in floating point
        new_lo = np.concatenate([lo[pick], mid])
        new_hi = np.concatenate([mid, hi[pick]])
        v2, e2, _ = _gk21(g, new_lo, new_hi)
        nev += 21 * len(new_lo)
        keep = np.ones(n, dtype=bool)
        keep[pick] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[keep], v2])
        errs = np.concatenate([errs[keep], e2])
        refinements += k
    order = np.argsort(lo, kind="stable")
    total = complex(vals[order].sum())
    err = float(errs[order].sum())
    return IntegralResult(total, err, nev, converged, 0.0, {"panels": len(lo)})


def _check_domain(pole, domain):
    a, b = float(domain[0]), float(domain[1])
    if not a < b:
        raise ValueError("domain must satisfy a < b")
    if pole == a or pole == b:
        raise ValueError("pole lies on the domain boundary")
    return a, b


def pv_integral(
    g: Callable,
    pole: float,
    domain: Sequence[float],
    config: QuadratureConfig | None = None,
    points: Iterable[float] = (),
) -> IntegralResult:
    """Principal value of ``integral g(x) / (pole - x) dx`` over ``domain``.

    The pole is removed by subtraction,

        PV int_a^b g/(t-x) = int_a^b (g(x) - g(t))/(t-x) dx + g(t) log((t-a)/(b-t)),

    so the remaining integrand is as smooth as g.  A pole outside the domain
    gives an ordinary integral.
    """
    cfg = config or DEFAULT_CONFIG
    t = float(pole)
    a, b = _check_domain(t, domain)
    pts = list(points)
    if not a < t < b:
        return adaptive(lambda x: g(x) / (t - x), a, b, cfg, pts)
    gt = complex(np.asarray(g(np.array([t])))[0])

    def h(x):
        d = t - x
        return (g(x) - gt) / d

    res = adaptive(h, a, b, cfg, pts + [t])
    log_term = gt * math.log((t - a) / (b - t))
    out = IntegralResult(res.value + log_term, res.error_estimate, res.evaluations + 1,
                         res.converged, 0.0, res.info)
    return out


def pv_excision(
    g: Callable,
    pole: float,
    domain: Sequence[float],
    eps: Sequence[float] = (1e-3, 1e-4, 1e-5),
    config: QuadratureConfig | None = None,
) -> IntegralResult:
    """Principal value by symmetric excision, Richardson-extrapolated in eps.

    Independent of :func:`pv_integral` and kept as its cross-check.  The
    excised integral has an error series in even powers of eps.
    """
    cfg = config or DEFAULT_CONFIG
    t = float(pole)
    a, b = _check_domain(t, domain)
    f = lambda x: g(x) / (t - x)
    vals = []
    err = 0.0
    nev = 0
    for e in eps:
        if not (a < t - e and t + e < b):
            raise ValueError("excision radius exceeds the domain")
        left = adaptive(f, a, t - e, cfg)
        right = adaptive(f, t + e, b, cfg)
        vals.append(left.value + right.value)
        err += left.error_estimate + right.error_estimate
        nev += left.evaluations + right.evaluations
    # the excised piece expands in odd powers of eps: fit 1, eps, eps^3, ...
    e = np.asarray(eps, dtype=float)
    basis = np.column_stack([np.ones_like(e)] + [e ** (2 * j - 1) for j in range(1, len(e))])
    coef = np.linalg.solve(basis, np.asarray(vals, dtype=complex))
    est = coef[0]
    # drop the last point to gauge the extrapolation error
    if len(e) > 2:
        b2 = basis[:-1, :-1]
        est2 = np.linalg.solve(b2, np.asarray(vals[:-1], dtype=complex))[0]
        spread = abs(est - est2)
    else:
        spread = abs(est - vals[-1])
    return IntegralResult(complex(est), err + spread, nev, True, 0.0)


def pv_second_order(
    phi: Callable,
    dphi: Callable,
    t: float,
    domain: Sequence[float],
    config: QuadratureConfig | None = None,
    points: Iterable[float] = (),
) -> IntegralResult:
    """Regularized ``integral phi(r) / (t - r)**2 dr := -PV integral phi'(r)/(t - r) dr``.

    ``phi`` must vanish at both ends of ``domain`` (the defining integration
    by parts has no boundary terms).  Only ``dphi`` is integrated; ``phi`` is
    accepted so callers pass the same object to both forms.
    """
    del phi
    res = pv_integral(dphi, t, domain, config, points)
    return -res


class _Product:
    """Pointwise product ``B * Phi`` with its derivative."""

    def __init__(self, profile, weight):
        self.profile = profile
        self.weight = weight

    def value(self, r):
        v = self.profile.value(r)
        return v if self.weight is None else self.weight.value(r) * v

    def derivative(self, r):
        if self.weight is None:
            return self.profile.derivative(r)
        return (self.weight.derivative(r) * self.profile.value(r)
                + self.weight.value(r) * self.profile.derivative(r))


def regularized_3d_kernel_integral(
    profile,
    t: float,
    weight=None,
    config: QuadratureConfig | None = None,
) -> IntegralResult:
    """Regularized ``integral t B(r) phi(x) / (t**2 - r**2)**2 d^3x``.

    With ``G = B * Phi`` extended evenly to the whole line,

        4 pi t int_0^inf r^2 G / (t^2 - r^2)^2 dr
            = pi [ t fp int G/(t-r)^2 dr - PV int G/(t-r) dr ]
            = pi [ -t PV int G'/(t-r) dr - PV int G/(t-r) dr ],

    using the partial fractions of ``4 t r^2 / (t^2 - r^2)^2`` and evenness.

    Parameters
    ----------
    profile
        Radial profile with vectorized ``value(r)``, ``derivative(r)`` (even
        extension to negative r) and ``outer_radius``.
    t : float
        Positive time.
    weight
        Optional smooth even factor with ``value`` and ``derivative``
        (complex allowed); ``None`` stands for ``B = 1``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    cfg = config or DEFAULT_CONFIG
    R = max(float(profile.outer_radius), t) + cfg.pv_window
    dom = (-R, R)
    G = _Product(profile, weight)
    pts = [p for p in getattr(profile, "breakpoints", ()) if -R < p < R]
    pts += [-t]
    # non-smooth points of the weight at r = +-t are handled as breakpoints
    first = pv_integral(G.derivative, t, dom, cfg, pts)
    second = pv_integral(G.value, t, dom, cfg, pts)
    return combine([first, second], [-math.pi * t, -math.pi])


def wynn_epsilon(seq: Sequence[complex]) -> tuple[complex, float]:
    """Wynn's epsilon algorithm on partial sums.

    Returns the last even-column estimate and the difference to the previous
    one as an error indicator.
    """
    s = [complex(v) for v in seq]
    n = len(s)
    if n < 3:
        return s[-1], float("inf") if n < 2 else abs(s[-1] - s[-2])
    e_prev = [0j] * (n + 1)
    e_cur = s[:]
    best = [s[-1]]
    for k in range(1, n):
        e_next = []
        for i in range(len(e_cur) - 1):
            d = e_cur[i + 1] - e_cur[i]
            if d == 0:
                e_next.append(complex("inf"))
            else:
                e_next.append(e_prev[i + 1] + 1.0 / d)
        e_prev, e_cur = e_cur, e_next
        if k % 2 == 0 and e_cur and np.isfinite(e_cur[-1]):
            best.append(e_cur[-1])
        if len(e_cur) < 2:
            break
    if len(best) < 2:
        return best[-1], abs(s[-1] - s[-2])
    return best[-1], abs(best[-1] - best[-2])


def _phase_factor(phase, omega, rho):
    if phase == "exp":
        return np.exp(1j * omega * rho)
    if phase == "cos":
        return np.cos(omega * rho)
    raise ValueError("phase must be 'exp' or 'cos'")


def oscillatory_halfline(
    g: Callable,
    omega: float,
    phase: str = "exp",
    config: QuadratureConfig | None = None,
    method: str | None = None,
    scale: float | None = None,
    subpanels: int = 2,
) -> IntegralResult:
    """``integral_0^inf g(rho) w(omega rho) d rho`` with ``w = exp(i .)`` or ``cos``.

    Parameters
    ----------
    g : callable
        Smooth integrand decaying at infinity; vectorized.
    omega : float
        Frequency of the oscillatory factor.
    phase : {"exp", "cos"}
    method : str, optional
        ``"panel_series_acceleration"``: integrate between consecutive zeros
        of the oscillatory factor (panels of length ``pi/|omega|``), accelerate
        the partial sums with Wynn's epsilon algorithm, and stop when either
        the accelerated sum is stable or the measured decay bounds the tail.
        ``"complex_contour"``: rotate to ``rho = +-i y``; g must accept complex
        arguments and be analytic and decaying in the quadrant swept.
    scale : float, optional
        Panel length used when ``omega == 0`` or when g oscillates faster
        than the weight (defaults to ``pi/|omega|`` capped at 4).
    subpanels : int
        GK21 sub-panels per panel before adaptive refinement kicks in.

    Returns
    -------
    IntegralResult
        ``tail_bound`` records the estimate of the discarded tail.
    """
    cfg = config or DEFAULT_CONFIG
    meth = method or cfg.oscillatory_method
    if meth not in OSCILLATORY_METHODS:
        raise ValueError("unknown method %r" % (meth,))
    if phase not in ("exp", "cos"):
        raise ValueError("phase must be 'exp' or 'cos'")
    if meth == "complex_contour":
        return _contour_halfline(g, omega, phase, cfg)
    return _panel_halfline(g, omega, phase, cfg, scale, subpanels)


def _contour_halfline(g, omega, phase, cfg):
    if omega == 0:
        raise MethodInapplicableError("contour rotation needs a nonzero frequency")

    def rotated(sign):
        # rho = i*sign*y, exp(i*omega*rho) = exp(-sign*omega*y)
        def h(y):
            z = 1j * sign * y
            try:
                gv = np.asarray(g(z), dtype=complex)
            except (TypeError, ValueError) as exc:
                raise MethodInapplicableError("integrand does not accept complex arguments") from exc
            return gv * np.exp(-sign * omega * y) * (1j * sign)
        return h

    s = 1.0 if omega > 0 else -1.0
    parts = [rotated(s)] if phase == "exp" else [rotated(s), _conj_rotation(g, omega, s)]
    coeffs = [1.0] if phase == "exp" else [0.5, 0.5]
    try:
        return combine([_ray_integral(h, cfg) for h in parts], coeffs)
    except FloatingPointError as exc:
        raise MethodInapplicableError("integrand not decaying along the rotated ray") from exc


def _ray_integral(h, cfg):
    """Integrate ``h`` over [0, inf) on doubling segments until they are negligible."""
    pieces = []
    lo, hi = 0.0, 1.0
    small = 0
    while True:
        r = adaptive(h, lo, hi, cfg)
        pieces.append(r)
        total = sum(p.value for p in pieces)
        if abs(r.value) <= 0.01 * cfg.tolerance(total):
            small += 1
            if small >= 2:
                return combine(pieces)
        else:
            small = 0
        if hi >= cfg.truncation_radius:
            out = combine(pieces)
            return IntegralResult(out.value, out.error_estimate, out.evaluations, False)
        lo, hi = hi, 2.0 * hi


def _conj_rotation(g, omega, s):
    def h(y):
        z = -1j * s * y
        gv = np.asarray(g(z), dtype=complex)
        return gv * np.exp(-s * omega * y) * (-1j * s)
    return h


def _panel_halfline(g, omega, phase, cfg, scale, subpanels):
    w = abs(omega)
    length = math.pi / w if w > 0 else 1.0
    if scale is not None:
        length = min(length, float(scale))
    length = min(length, 4.0)
    tol_abs = cfg.abs_tol
    nsub = max(1, int(subpanels))
    batch = 32
    partial = [0j]
    terms: list[complex] = []
    env: list[float] = []
    err = 0.0
    nev = 0
    start = 0.0
    stable = 0
    last_est = None
    value = None
    tail = float("inf")
    tol = tol_abs

    def integrand(x):
        return g(x) * _phase_factor(phase, omega, x)

    while True:
        if start >= cfg.truncation_radius:
            break
        edges = start + length * np.arange(batch + 1)
        sub = np.linspace(0.0, 1.0, nsub + 1)
        lo = (edges[:-1, None] + length * sub[None, :-1]).ravel()
        hi = (edges[:-1, None] + length * sub[None, 1:]).ravel()
        v, e, ra = _gk21(integrand, lo, hi)
        nev += 21 * len(lo)
        ra = ra.reshape(batch, nsub)
        tol = max(tol_abs, cfg.rel_tol * abs(partial[-1] + v.sum()))
        # g magnitude envelope per panel, from the panel nodes
        gx = np.abs(np.asarray(g(0.5 * (lo + hi))))
        v = v.reshape(batch, nsub)
        e = e.reshape(batch, nsub)
        gx = gx.reshape(batch, nsub)
        for i in range(batch):
            pv_ = complex(v[i].sum())
            pe = float(e[i].sum())
            if pe > 0.1 * tol and pe > 1e3 * _EPS * float(ra[i].sum()):
                r = adaptive(integrand, float(edges[i]), float(edges[i + 1]), cfg,
                             abs_tol=0.01 * tol, rel_tol=1e-15)
                nev += r.evaluations
                pv_, pe = r.value, r.error_estimate
            terms.append(pv_)
            env.append(float(gx[i].max()) * length)
            partial.append(partial[-1] + pv_)
            err += pe
        start = float(edges[-1])
        tol = max(tol_abs, cfg.rel_tol * abs(partial[-1]))
        tail = _tail_estimate(env)
        if tail <= 0.1 * tol:
            value = partial[-1]
            break
        est, est_err = wynn_epsilon(partial[-min(len(partial), 40):])
        if last_est is not None and abs(est - last_est) <= 0.1 * tol and est_err <= 0.1 * tol:
            stable += 1
        else:
            stable = 0
        last_est = est
        if stable >= 2 and len(terms) >= 64:
            # the accelerated limit replaces the explicit tail
            value = est
            tail = est_err
            break
    if value is None:
        value = partial[-1]
        converged = tail <= max(tol_abs, cfg.rel_tol * abs(value))
    else:
        converged = True
    total_err = err + tail
    converged = converged and total_err <= 10 * max(tol_abs, cfg.rel_tol * abs(value))
    return IntegralResult(complex(value), total_err, nev, converged, tail,
                          {"cutoff": start, "panels": len(terms)})


def _tail_estimate(env: Sequence[float], block: int = 16) -> float:
    """Bound the remaining tail from the decay of per-panel envelopes.

    The envelope is grouped in blocks; if block maxima decrease with ratio
    q < 1 the tail is at most ``M_last * q / (1 - q)`` times the block size.
    Non-decreasing envelopes give an infinite bound.
    """
    n = len(env) // block
    if n < 3:
        return float("inf")
    arr = np.asarray(env[: n * block]).reshape(n, block)
    sums = arr.sum(axis=1)
    last, prev = sums[-1], sums[-2]
    if last == 0:
        return 0.0
    q = last / prev if prev > 0 else 1.0
    q = max(q, sums[-2] / sums[-3] if sums[-3] > 0 else 1.0)
    if q >= 0.999:
        return float("inf")
    return float(last * q / (1.0 - q))
