"""Verification checks with pass/fail/inconclusive verdicts.

Every check compares two independent computations and reports the measured
discrepancy against a tolerance taken from :data:`DEFAULT_TOLERANCES`.  A
check is ``inconclusive`` (not failed) when the reference side itself cannot
be trusted to the requested tolerance: non-convergence of the oracle, or a
truncation bound larger than the tolerance.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import __version__, algebra, specfun
from .functionals import (
    FunctionalKind,
    cauchy_density_real_time,
    compose_1d,
    evaluate,
    integrate_density,
    momentum_pairing,
)
from .propagators import PropagatorSpec, classical_limit_scan, fw_equivalence, maxwell_symbol
from .quad import ConvergenceError, QuadratureConfig, adaptive, oscillatory_halfline
from .testfn import BumpFunction

__all__ = [
    "SCHEMA_VERSION",
    "TOLERANCE_TABLE_VERSION",
    "DEFAULT_TOLERANCES",
    "VERDICTS",
    "CheckSpec",
    "CheckReport",
    "standard_bump",
    "check_parseval",
    "check_gr3914",
    "check_densities",
    "check_semigroup",
    "check_massless_limit",
    "check_algebra",
    "check_classical_limit",
    "check_generator",
    "check_fw_equivalence",
    "check_transversality",
    "CHECKS",
    "DEFAULT_SUITE",
    "run_check",
    "run_suite",
    "suite_report",
    "write_report",
]

SCHEMA_VERSION = "qcauchy.report/1"
TOLERANCE_TABLE_VERSION = "2026.1"
VERDICTS = ("pass", "fail", "inconclusive")

# one place for every default tolerance
DEFAULT_TOLERANCES = {
    "gr3914": 1e-8,
    "parseval_1d": 1e-6,
    "parseval_3d": 1e-5,
    "densities": 1e-10,
    "fourier_pair": 1e-6,
    "semigroup": 1e-3,
    "semigroup_symbol": 1e-12,
    "massless_limit_1d": 1e-3,
    "massless_limit_3d": 1e-2,
    "algebra": 1e-12,
    "classical_limit": 0.02,
    "generator": 1e-5,
    "fw_equivalence": 1e-5,
    "transversality": 1e-12,
}


@dataclass(frozen=True)
class CheckSpec:
    """A named check with its parameters, tolerance and seed."""

    name: str
    parameters: dict = field(default_factory=dict)
    tolerance: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.tolerance is not None and not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


@dataclass
class CheckReport:
    """Outcome of one check.  ``pass`` holds exactly when measured <= tolerance
    and no reference bound made the comparison inconclusive."""

    name: str
    verdict: str
    measured: float
    tolerance: float
    details: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def line(self) -> str:
        return "%-28s %-12s measured=%.3e tol=%.1e" % (self.name, self.verdict.upper(),
                                                      self.measured, self.tolerance)

    def as_dict(self, include_runtime: bool = False) -> dict:
        """JSON-ready dict; wall time is left out unless asked for so that
        re-runs produce identical documents."""
        d = asdict(self)
        if not include_runtime:
            del d["runtime"]
        d["details"] = _jsonable(self.details)
        d["measured"] = _jsonable(self.measured)
        return d


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def _verdict(measured, tol, inconclusive=False):
    if inconclusive:
        return "inconclusive"
    return "pass" if measured <= tol else "fail"


def standard_bump(dimension: int) -> BumpFunction:
    """Default test functions: an off-center 1D mollifier and a radial 3D one
    whose support contains the sphere |x| = 1."""
    if dimension == 1:
        return BumpFunction(1, (0.3,), 1.0)
    return BumpFunction(3, (0.0, 0.0, 0.0), 1.5)


def _tol(name, tol):
    return DEFAULT_TOLERANCES[name] if tol is None else float(tol)


# ---------------------------------------------------------------------------
# checks


def check_parseval(kind: FunctionalKind, t: float = 1.0, phi=None, tol: float | None = None,
                   corrupt: bool = False) -> CheckReport:
    """Position-space value against the momentum-side oracle.

    ``corrupt=True`` flips the sign of the kernel term (a fixture to confirm
    the check can fail).
    """
    phi = phi if phi is not None else standard_bump(kind.dimension)
    tol = _tol("parseval_%dd" % kind.dimension, tol)
    name = "parseval_" + kind.name
    pos = evaluate(kind, t, phi)
    value = pos.delta_part - pos.kernel_part if corrupt else pos.value
    try:
        mom = momentum_pairing(kind, t, phi)
    except ConvergenceError as exc:
        return CheckReport(name, "inconclusive", float("nan"), tol, {"oracle_error": str(exc)})
    scale = abs(mom.value)
    measured = abs(value - mom.value) / scale
    oracle_rel = mom.error_estimate / scale
    details = {
        "t": t, "mass": kind.mass, "position": value, "momentum": mom.value,
        "delta_part": pos.delta_part, "kernel_part": pos.kernel_part,
        "position_error": pos.error_estimate, "oracle_error": mom.error_estimate,
        "oracle_cutoff": mom.info.get("cutoff"), "corrupted": corrupt,
    }
    return CheckReport(name, _verdict(measured, tol, not mom.converged or oracle_rel > tol),
                       measured, tol, details)


def gr3914_lhs(t: float, m: float, x: float, config: QuadratureConfig | None = None):
    """``int_0^inf exp(-t sqrt(p^2 + m^2)) cos(p x) dp`` by oscillatory quadrature."""
    def g(p):
        return np.exp(-t * np.sqrt(np.asarray(p) ** 2 + m * m))
    if x == 0:
        return adaptive(g, 0.0, np.inf, config)
    return oscillatory_halfline(g, x, "cos", config)


def gr3914_rhs(t: float, m: float, x: float) -> float:
    s = math.sqrt(t * t + x * x)
    return t * m * float(np.real(specfun.macdonald_k1(m * s))) / s


def check_gr3914(t: float = 1.0, m: float = 1.0, x_grid=(0.0, 0.5, 1.0, 2.0, 3.0),
                 tol: float | None = None) -> CheckReport:
    """Real-time Bessel identity (table integral 3.914 of Gradshteyn-Ryzhik).

    The comparison is inconclusive when the certified error of the quadrature
    side, relative to the right-hand side, exceeds ``tol``.  For large
    ``m x`` the right-hand side is many orders below the integrand, so the
    attainable relative accuracy is limited by cancellation.
    """
    tol = _tol("gr3914", tol)
    cfg = QuadratureConfig(abs_tol=1e-300, rel_tol=1e-13)
    rows = []
    worst = 0.0
    ok = True
    for x in x_grid:
        lhs = gr3914_lhs(t, m, float(x), cfg)
        rhs = gr3914_rhs(t, m, float(x))
        rel = abs(lhs.value - rhs) / abs(rhs)
        certified = lhs.error_estimate / abs(rhs)
        worst = max(worst, rel)
        ok = ok and certified <= tol
        rows.append({"x": float(x), "lhs": lhs.value.real, "rhs": rhs, "relative_error": rel,
                     "certified_relative_error": certified})
    return CheckReport("gr3914_t%g_m%g" % (t, m), _verdict(worst, tol, not ok), worst, tol,
                       {"t": t, "m": m, "rows": rows})


def check_densities(t: float = 1.0, p_grid=(0.5, 1.0, 2.0, 5.0), tol: float | None = None,
                    pair_tol: float | None = None) -> CheckReport:
    """Real-time densities integrate to one; the 1D density and
    ``exp(-t |p|)`` form a Fourier pair in the package convention.

    ``measured`` is the worse of the two ratios error/tolerance, so the check
    passes when it is at most 1.
    """
    tol = _tol("densities", tol)
    pair_tol = _tol("fourier_pair", pair_tol)
    cfg = QuadratureConfig(abs_tol=1e-14, rel_tol=1e-13)
    i1 = integrate_density(t, 1, config=cfg)
    i3 = integrate_density(t, 3, config=cfg)
    mass_err = max(abs(i1.value - 1), abs(i3.value - 1))
    k = cauchy_density_real_time(t, 1)
    pair = []
    pair_err = 0.0
    for p in p_grid:
        # forward: int k(x) exp(-i p x) dx = 2 int_0^inf k cos(p x)
        fwd = 2.0 * oscillatory_halfline(k, p, "cos", cfg).value.real
        # inverse at x = p: (1/2 pi) int exp(-t|q|) exp(i q x) dq
        inv = oscillatory_halfline(lambda q: np.exp(-t * np.asarray(q)), p, "cos", cfg).value.real / math.pi
        e1 = abs(fwd - math.exp(-t * p))
        e2 = abs(inv - float(k(p)))
        pair_err = max(pair_err, e1, e2)
        pair.append({"p": p, "forward": fwd, "exact": math.exp(-t * p), "inverse": inv})
    measured = max(mass_err / tol, pair_err / pair_tol)
    details = {"integral_1d": i1.value.real, "integral_3d": i3.value.real, "mass_error": mass_err,
               "pair_error": pair_err, "pair": pair, "tolerances": {"mass": tol, "pair": pair_tol}}
    return CheckReport("densities", _verdict(measured, 1.0), measured, 1.0, details)


def check_semigroup(t: float = 2.0, tau: float = 1.0, phi=None, R: float = 100.0,
                    tol: float | None = None, mass: float = 0.0) -> CheckReport:
    """Symbol additivity and the truncated position-side composition (1D)."""
    tol = _tol("semigroup", tol)
    phi = phi if phi is not None else standard_bump(1)
    kind = FunctionalKind(1, mass)
    p = np.linspace(-50.0, 50.0, 2001)
    sym = float(np.max(np.abs(kind.symbol(tau, p) * kind.symbol(t - tau, p) - kind.symbol(t, p))))
    direct = evaluate(kind, t, phi)
    comp, bound = compose_1d(t, tau, phi, R, mass)
    measured = abs(comp.value - direct.value) / abs(direct.value)
    sym_ok = sym <= DEFAULT_TOLERANCES["semigroup_symbol"]
    details = {"symbol_error": sym, "direct": direct.value, "composed": comp.value,
               "truncation_bound": bound, "R": R, "quadrature_error": comp.error_estimate}
    if not sym_ok:
        return CheckReport("semigroup", "fail", max(measured, sym), tol, details)
    inconclusive = bound / abs(direct.value) > tol or not comp.converged
    return CheckReport("semigroup", _verdict(measured, tol, inconclusive), measured, tol, details)


def check_massless_limit(dimension: int = 1, t: float = 1.0, phi=None,
                         m_sequence=(1.0, 0.1, 0.01, 0.001), tol: float | None = None) -> CheckReport:
    """Deviation from the massless value decreases strictly along m_sequence."""
    tol = _tol("massless_limit_%dd" % dimension, tol)
    phi = phi if phi is not None else standard_bump(dimension)
    ms = [float(m) for m in m_sequence]
    if any(b >= a for a, b in zip(ms, ms[1:])) or any(m < 0 for m in ms):
        raise ValueError("m_sequence must be strictly decreasing and non-negative")
    base = evaluate(FunctionalKind(dimension, 0.0), t, phi).value
    devs = [abs(evaluate(FunctionalKind(dimension, m), t, phi).value - base) / abs(base) for m in ms]
    monotone = all(b < a for a, b in zip(devs, devs[1:]))
    measured = devs[-1]
    verdict = _verdict(measured, tol) if monotone else "fail"
    return CheckReport("massless_limit_%dd" % dimension, verdict, measured, tol,
                       {"masses": ms, "deviations": devs, "monotone": monotone, "massless": base})


def check_algebra(n_samples: int = 100, seed: int = 0, tol: float | None = None) -> CheckReport:
    """Unitarity, involution, intertwining and spectra of the diagonalizers."""
    tol = _tol("algebra", tol)
    rng = np.random.default_rng(seed)
    p = rng.normal(size=(n_samples, 3)) * rng.uniform(0.1, 10.0, size=(n_samples, 1))
    ms = rng.uniform(0.0, 5.0, size=n_samples)
    # seed-axis edge cases: coordinate axes and an exact three-way tie
    edge = np.array([[0, 0, 1.0], [0, 2.0, 0], [3.0, 0, 0], [1.0, 1.0, 1.0], [-1.0, 1.0, -1.0]])
    p = np.vstack([p, edge])
    ms = np.concatenate([ms, [0.0, 1.0, 0.5, 0.0, 2.0]])
    worst = {}

    def upd(key, val):
        worst[key] = max(worst.get(key, 0.0), float(val))

    eye4, eye3 = np.eye(4), np.eye(3)
    for rep in algebra.REPRESENTATIONS:
        g0 = algebra.gamma_matrices(rep)[0].entries
        for pk, m in zip(p, ms):
            rho = np.linalg.norm(pk)
            t0 = algebra.fw_diagonalizer_massless(pk, rep).entries
            tm = algebra.fw_diagonalizer_massive(pk, m, rep).entries
            h = algebra.dirac_hamiltonian(pk, m, rep)
            e = math.sqrt(m * m + rho * rho)
            upd("T_involution", np.linalg.norm(t0 @ t0 - eye4))
            upd("T_hermitian", np.linalg.norm(t0 - t0.conj().T))
            upd("Tm_involution", np.linalg.norm(tm @ tm - eye4))
            upd("Tm_unitary", np.linalg.norm(tm.conj().T @ tm - eye4))
            upd("T_intertwining", np.linalg.norm(t0 @ g0 * rho @ t0 - algebra.dirac_hamiltonian(pk, 0.0, rep)))
            upd("Tm_intertwining", np.linalg.norm(tm @ (g0 * e) @ tm - h))
            ev = np.linalg.eigvalsh(algebra.dirac_hamiltonian(pk, 0.0, rep))
            upd("dirac_spectrum", np.max(np.abs(ev - np.array([-rho, -rho, rho, rho]))))
    for pk in p:
        rho = np.linalg.norm(pk)
        q = algebra.helicity_diagonalizer(pk).entries
        sp = algebra.spin_dot(pk)
        upd("Q_unitary", np.linalg.norm(q.conj().T @ q - eye3))
        upd("Q_diagonalizes", np.linalg.norm(q @ sp @ q.conj().T - np.diag([rho, -rho, 0.0])))
        ev = np.linalg.eigvalsh(sp)
        upd("spin_spectrum", np.max(np.abs(ev - np.array([-rho, 0.0, rho]))))
    # p = 0 must be rejected by the massless constructions
    rejected = True
    for fn in (algebra.fw_diagonalizer_massless, algebra.helicity_diagonalizer):
        try:
            fn(np.zeros(3))
            rejected = False
        except algebra.DegenerateMomentumError:
            pass
    # scale identities are measured relative to the momentum norm
    measured = max(worst.values())
    verdict = _verdict(measured, tol) if rejected else "fail"
    return CheckReport("algebra", verdict, measured, tol,
                       {"samples": len(p), "seed": seed, "worst": worst, "p0_rejected": rejected})


def check_classical_limit(t: float = 1.0, r_grid=(0.0, 0.5, 1.5, 2.0), m_list=(20.0, 30.0, 40.0),
                          tol: float | None = None) -> CheckReport:
    """Eikonal phase slope inside the light cone, exponential decay outside."""
    tol = _tol("classical_limit", tol)
    rows = classical_limit_scan(m_list, t, r_grid)
    measured = max(r["relative_error"] for r in rows)
    return CheckReport("classical_limit", _verdict(measured, tol), measured, tol, {"rows": rows})


def check_generator(kind: FunctionalKind, t: float = 1.0, phi=None, h: float = 1e-4,
                    tol: float | None = None) -> CheckReport:
    """Central difference in t of the position-space value against the
    momentum integral of ``i s sigma exp(i s t sigma)``."""
    tol = _tol("generator", tol)
    phi = phi if phi is not None else standard_bump(kind.dimension)
    if not 0 < h < t:
        raise ValueError("need 0 < h < t")
    vp = evaluate(kind, t + h, phi)
    vm = evaluate(kind, t - h, phi)
    fd = (vp.value - vm.value) / (2 * h)
    name = "generator_" + kind.name
    try:
        mom = momentum_pairing(kind, t, phi, order=1)
    except ConvergenceError as exc:
        return CheckReport(name, "inconclusive", float("nan"), tol, {"oracle_error": str(exc)})
    scale = abs(mom.value)
    measured = abs(fd - mom.value) / scale
    fd_noise = (vp.error_estimate + vm.error_estimate) / (2 * h) / scale
    details = {"t": t, "h": h, "finite_difference": fd, "momentum": mom.value,
               "oracle_error": mom.error_estimate, "difference_noise": fd_noise}
    inconclusive = not mom.converged or mom.error_estimate / scale > tol or fd_noise > tol
    return CheckReport(name, _verdict(measured, tol, inconclusive), measured, tol, details)


def check_fw_equivalence(kind: str = "dirac_massive", t: float = 1.0, m: float = 1.0, phi=None,
                         tol: float | None = None) -> CheckReport:
    """Full momentum-side matrix against its FW-conjugated counterparts.

    Whether the discrepancy also stays inside the summed error estimates of
    the two sides is recorded in ``details["within_error_budget"]``.
    """
    tol = _tol("fw_equivalence", tol)
    phi = phi if phi is not None else standard_bump(3)
    spec = PropagatorSpec(kind, t, m if kind == "dirac_massive" else 0.0, "full")
    res = fw_equivalence(spec, phi)
    measured = max(res["full_vs_conjugated"], res["projection_vs_fw"])
    budget = max(res["full_vs_conjugated_error"], res["projection_vs_fw_error"])
    name = "fw_equivalence_%s_m%g" % (kind, spec.m)
    details = {
        "full": res["full"].entries, "full_vs_conjugated": res["full_vs_conjugated"],
        "projection_vs_fw": res["projection_vs_fw"], "error_budget": budget,
        "within_error_budget": measured <= budget, "fit_residual": res["fw_conjugated"].info.get("fit_residual"),
        "fw_diagonal": np.diag(res["fw_diagonal"].entries),
    }
    return CheckReport(name, _verdict(measured, tol, not res["converged"]), measured, tol, details)


def check_transversality(n_samples: int = 50, seed: int = 0, t: float = 1.0,
                         tol: float | None = None) -> CheckReport:
    """Pointwise photon symbol keeps v ⊥ p transversal, freezes v = p and is unitary."""
    tol = _tol("transversality", tol)
    rng = np.random.default_rng(seed)
    p = rng.normal(size=(n_samples, 3)) * rng.uniform(0.1, 10.0, size=(n_samples, 1))
    z = rng.normal(size=(n_samples, 3)) + 1j * rng.normal(size=(n_samples, 3))
    pe = p / np.linalg.norm(p, axis=1)[:, None]
    v = z - np.sum(z * pe, axis=1)[:, None] * pe
    v /= np.linalg.norm(v, axis=1)[:, None]
    mt = maxwell_symbol(p, t)
    mv = np.einsum("nij,nj->ni", mt, v)
    trans = float(np.max(np.abs(np.sum(pe * mv, axis=1))))
    mp = np.einsum("nij,nj->ni", mt, p)
    longi = float(np.max(np.linalg.norm(mp - p, axis=1) / np.linalg.norm(p, axis=1)))
    norm = float(np.max(np.abs(np.linalg.norm(mv, axis=1) - 1.0)))
    measured = max(trans, longi, norm)
    return CheckReport("maxwell_transversality", _verdict(measured, tol), measured, tol,
                       {"transversality": trans, "longitudinal": longi, "norm": norm,
                        "samples": n_samples, "seed": seed})


# ---------------------------------------------------------------------------
# registry and suite

CHECKS: dict[str, tuple[Callable, dict]] = {
    "gr3914_t1_m1": (check_gr3914, {"t": 1.0, "m": 1.0}),
    "gr3914_t2_m1": (check_gr3914, {"t": 2.0, "m": 1.0}),
    "gr3914_t1_m0.5": (check_gr3914, {"t": 1.0, "m": 0.5}),
    "gr3914_t1_m10": (check_gr3914, {"t": 1.0, "m": 10.0, "x_grid": (0.0, 0.5, 1.0, 2.0)}),
    "densities": (check_densities, {}),
    "algebra": (check_algebra, {}),
    "semigroup": (check_semigroup, {}),
    "massless_limit_1d": (check_massless_limit, {"dimension": 1}),
    "massless_limit_3d": (check_massless_limit, {"dimension": 3}),
    "classical_limit": (check_classical_limit, {}),
    "maxwell_transversality": (check_transversality, {}),
}
for _d in (1, 3):
    for _m in (0.0, 1.0):
        _k = FunctionalKind(_d, _m)
        CHECKS["parseval_" + _k.name] = (check_parseval, {"kind": _k})
        CHECKS["generator_" + _k.name] = (check_generator, {"kind": _k})
CHECKS["fw_equivalence_dirac_massless_m0"] = (check_fw_equivalence, {"kind": "dirac_massless", "m": 0.0})
CHECKS["fw_equivalence_dirac_massive_m1"] = (check_fw_equivalence, {"kind": "dirac_massive", "m": 1.0})
CHECKS["fw_equivalence_maxwell_m0"] = (check_fw_equivalence, {"kind": "maxwell", "m": 0.0})

DEFAULT_SUITE = tuple(sorted(CHECKS))


def run_check(spec: CheckSpec | str) -> CheckReport:
    """Run one registered check; parameters in the spec override defaults."""
    if isinstance(spec, str):
        spec = CheckSpec(spec)
    if spec.name not in CHECKS:
        raise KeyError("unknown check %r" % (spec.name,))
    fn, defaults = CHECKS[spec.name]
    kw = dict(defaults)
    kw.update(spec.parameters)
    if spec.tolerance is not None:
        kw["tol"] = spec.tolerance
    if "seed" in fn.__code__.co_varnames:
        kw.setdefault("seed", spec.seed)
    t0 = time.perf_counter()
    try:
        rep = fn(**kw)
    except ConvergenceError as exc:
        rep = CheckReport(spec.name, "inconclusive", float("nan"), kw.get("tol") or float("nan"),
                          {"error": str(exc)})
    rep.name = spec.name
    rep.runtime = time.perf_counter() - t0
    return rep


def run_suite(names=None, workers: int = 1, overrides: dict | None = None) -> list[CheckReport]:
    """Run checks (default: all) and return reports sorted by name.

    ``overrides`` maps check names to :class:`CheckSpec` instances.
    """
    names = list(DEFAULT_SUITE if names is None else names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError("unknown check(s): %s" % ", ".join(unknown))
    specs = [(overrides or {}).get(n, CheckSpec(n)) for n in names]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            reports = list(ex.map(run_check, specs))
    else:
        reports = [run_check(s) for s in specs]
    return sorted(reports, key=lambda r: r.name)


def suite_report(reports: list[CheckReport]) -> dict:
    counts = {v: sum(r.verdict == v for r in reports) for v in VERDICTS}
    return {
        "schema": SCHEMA_VERSION,
        "artifact_version": __version__,
        "tolerance_table": TOLERANCE_TABLE_VERSION,
        "summary": counts,
        "checks": [r.as_dict() for r in sorted(reports, key=lambda r: r.name)],
    }


def write_report(reports: list[CheckReport], path) -> dict:
    doc = suite_report(reports)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return doc
