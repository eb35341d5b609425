"""Matrix propagators of the free Dirac and Maxwell equations on test functions.

Two evaluation routes are provided:

* FW-diagonal form, assembled entry by entry from the scalar functionals of
  :mod:`qcauchy.functionals` (position space).
* Full form, integrated on the momentum side.  For fixed ``rho = |p|`` every
  symbol here is a polynomial of degree at most two in the direction
  ``w = p / rho``, so its sphere integral against ``phi^(-p)`` only needs the
  spectral moments of :func:`qcauchy.testfn.spectral_moments`.  What remains
  are 1D oscillatory integrals in rho.

A symbol is represented as a sum of parts ``exp(i s t sigma) * A(rho, w)``
with ``s`` in {+1, -1, 0} and ``A`` expanded in the basis
``1, w_j, w_j w_k``.  The closed-form route writes the expansion down; the
``fw_conjugated`` route builds ``A`` pointwise from the numerically computed
diagonalizers and recovers the coefficients by a least-squares fit on 26
sphere directions, so it shares no algebra with the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import algebra, specfun
from .functionals import FunctionalKind, FunctionalValue, ORACLE_CONFIG_3D, conjugate_apply, evaluate
from .quad import IntegralResult, QuadratureConfig, oscillatory_halfline
from .testfn import TestFunction, spectral_moments

__all__ = [
    "PROPAGATOR_KINDS",
    "FORMS",
    "PropagatorSpec",
    "MatrixFunctionalValue",
    "dirac_symbol",
    "dirac_symbol_fw",
    "maxwell_symbol",
    "maxwell_symbol_fw",
    "maxwell_fw_symbol",
    "dirac_fw_apply",
    "dirac_full_momentum_apply",
    "maxwell_fw_apply",
    "maxwell_full_momentum_apply",
    "fw_equivalence",
    "massive_kernel_3d",
    "classical_limit_scan",
]

PROPAGATOR_KINDS = ("dirac_massless", "dirac_massive", "maxwell")
FORMS = ("fw_diagonal", "full")
METHODS = ("symbol", "fw_conjugated")


@dataclass(frozen=True)
class PropagatorSpec:
    """Which matrix propagator, at which time and mass, in which form."""

    kind: str
    t: float
    m: float = 0.0
    form: str = "fw_diagonal"
    representation: str = "dirac"

    def __post_init__(self):
        if self.kind not in PROPAGATOR_KINDS:
            raise ValueError("unknown propagator kind %r" % (self.kind,))
        if self.form not in FORMS:
            raise ValueError("form must be one of %s" % (FORMS,))
        if not (math.isfinite(self.t) and self.t > 0):
            raise ValueError("t must be a positive finite time")
        if not (math.isfinite(self.m) and self.m >= 0):
            raise ValueError("mass must be finite and non-negative")
        if self.kind == "dirac_massive" and self.m == 0:
            raise ValueError("dirac_massive needs m > 0")
        if self.kind in ("dirac_massless", "maxwell") and self.m != 0:
            raise ValueError("%s forces m = 0" % self.kind)
        if self.representation not in algebra.REPRESENTATIONS:
            raise ValueError("unknown representation %r" % (self.representation,))
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "m", float(self.m))

    @property
    def size(self) -> int:
        return 3 if self.kind == "maxwell" else 4


@dataclass(frozen=True)
class MatrixFunctionalValue:
    """Matrix of functional values with entrywise error estimates."""

    entries: np.ndarray
    errors: np.ndarray
    spec: PropagatorSpec | None = None
    method: str = ""
    converged: bool = True
    info: dict = field(default_factory=dict, compare=False)

    @property
    def error_estimate(self) -> float:
        return float(np.max(self.errors))

    @property
    def shape(self):
        return self.entries.shape

    def dot(self, v) -> np.ndarray:
        """Apply the matrix to a constant vector."""
        return self.entries @ np.asarray(v, dtype=complex)

    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries).copy()

    def as_rows(self) -> list[dict]:
        n = self.entries.shape[0]
        return [{"row": i + 1, "col": j + 1, "value": complex(self.entries[i, j]),
                 "error_estimate": float(self.errors[i, j])}
                for i in range(n) for j in range(n)]


# ---------------------------------------------------------------------------
# pointwise symbols


def _energy(p, m):
    rho = np.linalg.norm(p, axis=-1)
    return np.sqrt(m * m + rho * rho)


def dirac_symbol(p, t: float, m: float = 0.0, representation: str = "dirac", time_sign: int = 1):
    """``exp(i s t H(p)) = cos(t E) I + i s sin(t E) H / E`` with
    ``H = gamma0 (gamma, p) + m gamma0``; p of shape (n, 3)."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    e = _energy(p, m)
    h = algebra.dirac_hamiltonian(p, m, representation)
    with np.errstate(invalid="ignore", divide="ignore"):
        sinc = np.where(e > 0, np.sin(t * e) / np.where(e > 0, e, 1.0), t)
    return (np.cos(t * e)[:, None, None] * np.eye(4)
            + 1j * time_sign * sinc[:, None, None] * h)


def dirac_symbol_fw(p, t: float, m: float = 0.0, representation: str = "dirac", time_sign: int = 1):
    """``T(p) exp(i s t gamma0 E) T(p)`` from the numerical diagonalizer."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    tt = algebra.fw_diagonalizer_batch(p, m, representation)
    g0 = algebra.gamma_matrices(representation)[0].entries
    e = _energy(p, m)
    plus = 0.5 * (np.eye(4) + g0)
    minus = 0.5 * (np.eye(4) - g0)
    mid = (np.exp(1j * time_sign * t * e)[:, None, None] * plus
           + np.exp(-1j * time_sign * t * e)[:, None, None] * minus)
    return tt @ mid @ tt


def maxwell_fw_symbol(p, t: float):
    """``diag(exp(-i t rho), exp(i t rho), 1)``."""
    rho = np.linalg.norm(np.atleast_2d(p), axis=-1)
    out = np.zeros((len(rho), 3, 3), dtype=complex)
    out[:, 0, 0] = np.exp(-1j * t * rho)
    out[:, 1, 1] = np.exp(1j * t * rho)
    out[:, 2, 2] = 1.0
    return out


def maxwell_symbol(p, t: float):
    """``exp(-i t (S, p)) = cos(t rho) I + (1 - cos(t rho)) w w^T - i sin(t rho) (S, w)``."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    rho = np.linalg.norm(p, axis=-1)
    if np.any(rho == 0):
        raise algebra.DegenerateMomentumError("direction undefined at p = 0")
    w = p / rho[:, None]
    c = np.cos(t * rho)[:, None, None]
    s = np.sin(t * rho)[:, None, None]
    ww = w[:, :, None] * w[:, None, :]
    return c * np.eye(3) + (1.0 - c) * ww - 1j * s * algebra.spin_dot(w)


def maxwell_symbol_fw(p, t: float):
    """``Q(p)^H diag(exp(-i t rho), exp(i t rho), 1) Q(p)`` from the helicity basis."""
    q = algebra.helicity_diagonalizer_batch(p)
    return np.conj(np.swapaxes(q, -1, -2)) @ maxwell_fw_symbol(p, t) @ q


# ---------------------------------------------------------------------------
# momentum-side engine

_PAIRS = [(j, k) for j in range(3) for k in range(j, 3)]
_NBASIS = 1 + 3 + len(_PAIRS)


def _directions():
    pts = [np.array(v, dtype=float) for v in np.ndindex(3, 3, 3)]
    dirs = np.array([v - 1.0 for v in pts if np.any(v != 1)])
    return dirs / np.linalg.norm(dirs, axis=1)[:, None]


_DIRS = _directions()


def _basis(w):
    cols = [np.ones(len(w))] + [w[:, j] for j in range(3)] + [w[:, j] * w[:, k] for j, k in _PAIRS]
    return np.stack(cols, axis=-1)


# the constant is dependent on the diagonal quadratics on the sphere, so the
# fit uses the 9 non-constant functions
_FIT = np.linalg.pinv(_basis(_DIRS)[:, 1:])


def _closed_coefficients(const, linear, quad=None):
    """Pack coefficient matrices (n, k, k) into the basis layout (n, 10, k, k)."""
    n, k = const.shape[0], const.shape[-1]
    c = np.zeros((n, _NBASIS, k, k), dtype=complex)
    c[:, 0] = const
    for j in range(3):
        if linear is not None:
            c[:, 1 + j] = linear[j]
    if quad is not None:
        for idx, (j, kk) in enumerate(_PAIRS):
            c[:, 4 + idx] = quad[(j, kk)]
    return c


def _fitted_coefficients(matrix_fn, rho, info):
    """Fit ``matrix_fn(rho w)`` by the quadratic basis on the sphere directions."""
    n = len(rho)
    p = (rho[:, None, None] * _DIRS[None, :, :]).reshape(-1, 3)
    vals = matrix_fn(p)
    k = vals.shape[-1]
    vals = vals.reshape(n, len(_DIRS), k, k)
    coef = np.einsum("bd,ndij->nbij", _FIT, vals)
    fitted = np.einsum("db,nbij->ndij", _basis(_DIRS)[:, 1:], coef)
    resid = float(np.max(np.abs(fitted - vals), initial=0.0))
    info["fit_residual"] = max(info.get("fit_residual", 0.0), resid)
    out = np.zeros((n, _NBASIS, k, k), dtype=complex)
    out[:, 1:] = coef
    return out


class _Moments:
    """Spectral moments of phi^(-p), cached by the rho nodes."""

    def __init__(self, phi):
        self.phi = phi
        self.cache = {}

    def __call__(self, rho):
        key = rho.tobytes()
        hit = self.cache.get(key)
        if hit is None:
            f0, f1, f2 = spectral_moments(self.phi, rho, sign=-1)
            b = np.zeros((len(rho), _NBASIS), dtype=complex)
            b[:, 0] = f0
            b[:, 1:4] = f1
            for idx, (j, k) in enumerate(_PAIRS):
                b[:, 4 + idx] = f2[:, j, k]
            hit = b
            self.cache[key] = hit
        return hit


class _Part:
    """One ``exp(i s t sigma) * A(rho, w)`` part with cached contractions."""

    def __init__(self, s, coef_fn, moments, t, mass):
        self.s, self.coef_fn, self.moments = s, coef_fn, moments
        self.t, self.mass = t, mass
        self.cache = {}

    def matrix(self, rho):
        rho = np.ascontiguousarray(rho, dtype=float)
        key = rho.tobytes()
        hit = self.cache.get(key)
        if hit is None:
            coef = self.coef_fn(rho)
            hit = np.einsum("nb,nbij->nij", self.moments(rho), coef)
            hit = hit * (rho * rho / (2.0 * math.pi ** 2))[:, None, None]
            if self.mass > 0 and self.s != 0:
                sig = np.sqrt(self.mass ** 2 + rho * rho)
                # exp(i s t (sigma - rho)) with sigma - rho = m^2/(sigma + rho)
                hit = hit * np.exp(1j * self.s * self.t * self.mass ** 2 / (sig + rho))[:, None, None]
            self.cache[key] = hit
        return hit


def _integrate_parts(parts, k, scale, cfg, entries=None):
    vals = np.zeros((k, k), dtype=complex)
    errs = np.zeros((k, k))
    ok = True
    nev = 0
    todo = entries if entries is not None else [(i, j) for i in range(k) for j in range(k)]
    for part in parts:
        for i, j in todo:
            def g(rho, part=part, i=i, j=j):
                return part.matrix(np.atleast_1d(rho))[:, i, j]
            r: IntegralResult = oscillatory_halfline(g, part.s * part.t, "exp", cfg, scale=scale)
            vals[i, j] += r.value
            errs[i, j] += r.error_estimate
            ok = ok and r.converged
            nev += r.evaluations
    return vals, errs, ok, nev


def _scale(phi):
    return math.pi / max(phi.radial_extent()[1], 1e-3)


def _check_phi(phi):
    if not isinstance(phi, TestFunction) or phi.dimension != 3:
        raise ValueError("propagators act on 3D test functions")


def _dirac_parts(spec, moments, method, time_sign, project_fw, info):
    m, t, rep = spec.m, spec.t, spec.representation
    g = algebra.gamma_matrices(rep)
    g0 = g[0].entries
    a = [g0 @ g[j + 1].entries for j in range(3)]
    eye = np.eye(4)
    parts = []
    for s in (1, -1):
        # exp(i t H) = exp(i t E) (I + H/E)/2 + exp(-i t E) (I - H/E)/2
        def closed(p, s=s):
            e = _energy(p, m)
            return 0.5 * (eye + s * algebra.dirac_hamiltonian(p, m, rep) / e[:, None, None])

        if project_fw:
            def mat(p, closed=closed):
                tt = algebra.fw_diagonalizer_batch(p, m, rep)
                return tt @ closed(p) @ tt

            def coef(rho, mat=mat):
                return _fitted_coefficients(mat, rho, info)
        elif method == "symbol":
            def coef(rho, s=s):
                e = np.sqrt(m * m + rho * rho)
                n = len(rho)
                const = 0.5 * (eye[None] + s * (m / e)[:, None, None] * g0[None])
                lin = [0.5 * s * (rho / e)[:, None, None] * a[j][None] for j in range(3)]
                return _closed_coefficients(np.broadcast_to(const, (n, 4, 4)), lin)
        else:
            proj = 0.5 * (eye + s * g0)

            def mat(p, proj=proj):
                tt = algebra.fw_diagonalizer_batch(p, m, rep)
                return tt @ proj @ tt

            def coef(rho, mat=mat):
                return _fitted_coefficients(mat, rho, info)
        parts.append(_Part(s * time_sign, coef, moments, t, m))
    return parts


def dirac_fw_apply(spec: PropagatorSpec, phi: TestFunction,
                   config: QuadratureConfig | None = None) -> MatrixFunctionalValue:
    """FW-diagonal Dirac propagator ``diag(<C>, <C>, <conj C>, <conj C>)``.

    The entries come from the position-space functionals; off-diagonal
    entries are structural zeros.
    """
    _check_phi(phi)
    kind = FunctionalKind(3, spec.m)
    fwd = evaluate(kind, spec.t, phi, config)
    bwd = conjugate_apply(kind, spec.t, spec.m, phi, config)
    d = np.array([fwd.value, fwd.value, bwd.value, bwd.value])
    e = np.array([fwd.error_estimate, fwd.error_estimate, bwd.error_estimate, bwd.error_estimate])
    return MatrixFunctionalValue(np.diag(d), np.diag(e), spec, "position_fw",
                                 fwd.converged and bwd.converged, {"functionals": (fwd, bwd)})


def dirac_full_momentum_apply(spec: PropagatorSpec, phi: TestFunction, method: str = "symbol",
                              project_fw: bool = False, time_sign: int = 1,
                              config: QuadratureConfig | None = None) -> MatrixFunctionalValue:
    """Full Dirac propagator ``(2 pi)^-3 int exp(i s t H(p)) phi^(-p) dp``.

    Parameters
    ----------
    method : {"symbol", "fw_conjugated"}
        ``"symbol"`` expands ``exp(i t H)`` in closed form;
        ``"fw_conjugated"`` builds ``T exp(i t gamma0 E) T`` from the
        numerical diagonalizer at each node.
    project_fw : bool
        Conjugate the integrand by ``T(p)`` before integrating, which should
        return the FW diagonal.
    time_sign : {1, -1}
        ``-1`` gives the conjugate-time propagator.
    """
    _check_phi(phi)
    if method not in METHODS:
        raise ValueError("method must be one of %s" % (METHODS,))
    if time_sign not in (1, -1):
        raise ValueError("time_sign must be +1 or -1")
    cfg = config or ORACLE_CONFIG_3D
    info: dict = {}
    moments = _Moments(phi)
    parts = _dirac_parts(spec, moments, method, time_sign, project_fw, info)
    entries = [(i, i) for i in range(4)] if project_fw else None
    vals, errs, ok, nev = _integrate_parts(parts, 4, _scale(phi), cfg, entries)
    info["evaluations"] = nev
    label = method + ("+fw_projection" if project_fw else "")
    return MatrixFunctionalValue(vals, errs, spec, label, ok, info)


def maxwell_fw_apply(t: float, phi: TestFunction,
                     config: QuadratureConfig | None = None) -> MatrixFunctionalValue:
    """FW-diagonal photon propagator ``diag(<conj C>, <C>, phi(0))``."""
    _check_phi(phi)
    spec = PropagatorSpec("maxwell", t, 0.0, "fw_diagonal")
    kind = FunctionalKind(3, 0.0)
    fwd = evaluate(kind, spec.t, phi, config)
    bwd = conjugate_apply(kind, spec.t, 0.0, phi, config)
    delta = complex(float(phi(np.zeros(3))))
    d = np.array([bwd.value, fwd.value, delta])
    e = np.array([bwd.error_estimate, fwd.error_estimate, 0.0])
    return MatrixFunctionalValue(np.diag(d), np.diag(e), spec, "position_fw",
                                 fwd.converged and bwd.converged, {"functionals": (bwd, fwd)})


def _maxwell_parts(t, moments, method, project_fw, info):
    spins = [s.entries for s in algebra.spin_matrices()]
    eye = np.eye(3)
    parts = []
    # (s, helicity row): row 0 evolves with exp(-i t rho), row 1 with exp(+i t rho)
    for s, row in ((-1, 0), (1, 1), (0, 2)):
        def closed(p, s=s):
            w = p / np.linalg.norm(p, axis=-1)[:, None]
            ww = w[:, :, None] * w[:, None, :]
            if s == 0:
                return ww.astype(complex)
            return 0.5 * (eye - ww) - 0.5 * s * algebra.spin_dot(w)

        if project_fw:
            def mat(p, closed=closed):
                q = algebra.helicity_diagonalizer_batch(p)
                return q @ closed(p) @ np.conj(np.swapaxes(q, -1, -2))

            def coef(rho, mat=mat):
                return _fitted_coefficients(mat, rho, info)
        elif method == "symbol":
            def coef(rho, s=s):
                n = len(rho)
                quad = {}
                for j, k in _PAIRS:
                    e = np.zeros((3, 3))
                    e[j, k] = e[k, j] = 1.0
                    quad[(j, k)] = np.broadcast_to((1.0 if s == 0 else -0.5) * e, (n, 3, 3))
                if s == 0:
                    const = np.zeros((n, 3, 3))
                    lin = None
                else:
                    const = np.broadcast_to(0.5 * eye, (n, 3, 3))
                    lin = [np.broadcast_to(-0.5 * s * spins[j], (n, 3, 3)) for j in range(3)]
                return _closed_coefficients(const, lin, quad)
        else:
            proj = np.zeros((3, 3))
            proj[row, row] = 1.0

            def mat(p, proj=proj):
                q = algebra.helicity_diagonalizer_batch(p)
                return np.conj(np.swapaxes(q, -1, -2)) @ proj @ q

            def coef(rho, mat=mat):
                return _fitted_coefficients(mat, rho, info)
        parts.append(_Part(s, coef, moments, t, 0.0))
    return parts


def maxwell_full_momentum_apply(t: float, phi: TestFunction, initial_vector=None, method: str = "symbol",
                                project_fw: bool = False,
                                config: QuadratureConfig | None = None) -> MatrixFunctionalValue:
    """Full photon propagator ``(2 pi)^-3 int Q^H M^F Q phi^(-p) dp`` acting on
    Majorana coordinates ``E + i H``.

    With ``initial_vector`` the propagated constant vector is stored in
    ``info["vector"]``.
    """
    _check_phi(phi)
    if method not in METHODS:
        raise ValueError("method must be one of %s" % (METHODS,))
    spec = PropagatorSpec("maxwell", t, 0.0, "full")
    cfg = config or ORACLE_CONFIG_3D
    info: dict = {}
    parts = _maxwell_parts(spec.t, _Moments(phi), method, project_fw, info)
    entries = [(i, i) for i in range(3)] if project_fw else None
    vals, errs, ok, nev = _integrate_parts(parts, 3, _scale(phi), cfg, entries)
    info["evaluations"] = nev
    if initial_vector is not None:
        v = np.asarray(initial_vector, dtype=complex)
        if v.shape != (3,):
            raise ValueError("initial_vector must be a complex 3-vector")
        info["vector"] = vals @ v
    label = method + ("+fw_projection" if project_fw else "")
    return MatrixFunctionalValue(vals, errs, spec, label, ok, info)


def fw_equivalence(spec: PropagatorSpec, phi: TestFunction,
                   config: QuadratureConfig | None = None) -> dict:
    """Compare the full propagator with its FW-conjugated counterparts.

    Returns the three matrices and the entrywise discrepancies:

    * ``full_vs_conjugated``: closed-form symbol against the pointwise
      ``T^H D^F T`` (or ``Q^H M^F Q``) integrand, integrated the same way;
    * ``projection_vs_fw``: the diagonal of the full integrand conjugated by
      ``T`` (or ``Q``) against the position-space FW diagonal.

    Each discrepancy comes with the summed error estimates of its two sides.
    """
    _check_phi(phi)
    if spec.kind == "maxwell":
        full = maxwell_full_momentum_apply(spec.t, phi, method="symbol", config=config)
        conj = maxwell_full_momentum_apply(spec.t, phi, method="fw_conjugated", config=config)
        proj = maxwell_full_momentum_apply(spec.t, phi, method="symbol", project_fw=True, config=config)
        fw = maxwell_fw_apply(spec.t, phi)
    else:
        full = dirac_full_momentum_apply(spec, phi, "symbol", config=config)
        conj = dirac_full_momentum_apply(spec, phi, "fw_conjugated", config=config)
        proj = dirac_full_momentum_apply(spec, phi, "symbol", project_fw=True, config=config)
        fw = dirac_fw_apply(spec, phi)
    d1 = np.abs(full.entries - conj.entries)
    e1 = full.errors + conj.errors
    d2 = np.abs(np.diag(proj.entries) - np.diag(fw.entries))
    e2 = np.diag(proj.errors) + np.diag(fw.errors)
    return {
        "full": full,
        "fw_conjugated": conj,
        "projected": proj,
        "fw_diagonal": fw,
        "full_vs_conjugated": float(np.max(d1)),
        "full_vs_conjugated_error": float(np.max(e1)),
        "projection_vs_fw": float(np.max(d2)),
        "projection_vs_fw_error": float(np.max(e2)),
        "converged": full.converged and conj.converged and proj.converged and fw.converged,
    }


# ---------------------------------------------------------------------------
# quasi-classical behaviour of the massive 3D kernel


def massive_kernel_3d(t: float, r, m: float):
    """Smooth part ``-(i / pi^2) t B(t, r) / (t^2 - r^2)^2`` of the forward
    massive 3D kernel, away from the light cone."""
    r = np.asarray(r, dtype=float)
    b = specfun.b_factor_3d(t, r, m, -1)
    return -1j / math.pi ** 2 * t * b / (t * t - r * r) ** 2


def classical_limit_scan(m_list, t: float = 1.0, r_grid=(0.0, 0.5, 1.5, 2.0), margin: float = 1e-3,
                         dm: float = 0.05) -> list[dict]:
    """Slopes of the massive kernel in m inside and outside the light cone.

    Inside (r < t) the unwrapped phase is tracked on a grid of step ``dm``
    covering ``m_list`` (the phase advances by ``l_t * dm`` per step, so
    unwrapping is unambiguous) and its least-squares slope over ``m_list`` is
    compared with ``l_t = sqrt(t^2 - r^2)``.  Outside, the kernel behaves like
    ``m^(3/2) exp(-m sqrt(r^2 - t^2))``; the slope of ``log|K| - 1.5 log m``
    is compared with ``-sqrt(r^2 - t^2)``.  The uncorrected slope is reported
    as ``raw_slope``.

    Raises
    ------
    ValueError
        If a radius lies within ``margin * t`` of the light cone or the
        masses are not positive and increasing.
    """
    if not (math.isfinite(t) and t > 0):
        raise ValueError("t must be positive")
    ms = np.asarray(m_list, dtype=float)
    if ms.ndim != 1 or len(ms) < 2 or np.any(ms <= 0) or np.any(np.diff(ms) <= 0):
        raise ValueError("m_list must hold at least two increasing positive masses")
    rows = []
    for r in r_grid:
        r = float(r)
        if r < 0 or abs(r - t) <= margin * t:
            raise ValueError("r = %g touches the light cone (t = %g)" % (r, t))
        if r < t:
            lt = math.sqrt(t * t - r * r)
            n = int(math.ceil((ms[-1] - ms[0]) / dm))
            dense = np.unique(np.concatenate([np.linspace(ms[0], ms[-1], n + 1), ms]))
            ph = np.unwrap(np.angle([massive_kernel_3d(t, r, mm) for mm in dense]))
            y = ph[np.searchsorted(dense, ms)]
            slope = float(np.polyfit(ms, y, 1)[0])
            rows.append({"r": r, "regime": "inside", "quantity": "phase", "expected": lt,
                         "slope": slope, "raw_slope": slope,
                         "relative_error": abs(slope - lt) / lt})
        else:
            kappa = math.sqrt(r * r - t * t)
            mag = np.array([abs(massive_kernel_3d(t, r, mm)) for mm in ms])
            if np.any(mag == 0):
                raise ValueError("kernel underflows at r = %g; use smaller masses" % r)
            raw = float(np.polyfit(ms, np.log(mag), 1)[0])
            slope = float(np.polyfit(ms, np.log(mag) - 1.5 * np.log(ms), 1)[0])
            rows.append({"r": r, "regime": "outside", "quantity": "log_magnitude", "expected": -kappa,
                         "slope": slope, "raw_slope": raw,
                         "relative_error": abs(slope + kappa) / kappa})
    return rows
