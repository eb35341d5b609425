"""Command-line front end.

Examples
--------
::

    qcauchy eval --set functional.kind=3d_massive --set functional.m=1
    qcauchy sweep --set sweep.parameter=t --set sweep.num=5 --format json-lines
    qcauchy verify --set verify.checks=[parseval_1d_massless]
    qcauchy report --output report.json
    qcauchy --print-default-config > run.yaml

Exit codes: 0 success, 2 configuration error, 3 quadrature non-convergence,
4 internal error, 5 some check inconclusive, 6 some check failed.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys

import numpy as np
import yaml

from . import harness
from .functionals import FunctionalKind, evaluate
from .propagators import (
    PropagatorSpec,
    dirac_full_momentum_apply,
    dirac_fw_apply,
    maxwell_fw_apply,
    maxwell_full_momentum_apply,
)
from .quad import ConvergenceError, QuadratureConfig
from .testfn import BumpFunction

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_INTERNAL = 4
EXIT_INCONCLUSIVE = 5
EXIT_FAIL = 6

COMMANDS = ("eval", "verify", "sweep", "report")
SCALAR_KINDS = ("1d_massless", "1d_massive", "3d_massless", "3d_massive")
MATRIX_KINDS = ("dirac_massless", "dirac_massive", "maxwell")

DEFAULT_CONFIG_TEXT = """\
# qcauchy run configuration (YAML).  Every key may be overridden on the
# command line with --set section.key=value.

command: eval            # eval | verify | sweep | report

functional:
  kind: 1d_massless      # 1d_massless | 1d_massive | 3d_massless | 3d_massive
                         # | dirac_massless | dirac_massive | maxwell
  t: 1.0                 # imaginary-time parameter, must be > 0
  m: 0.0                 # mass; > 0 for the massive kinds, 0 otherwise
  time_sign: forward     # forward | conjugate (scalar kinds)
  form: fw_diagonal      # fw_diagonal | full (matrix kinds)
  method: symbol         # symbol | fw_conjugated (full form only)

test_function:           # null fields take the standard bump of the dimension
  dimension: null        # 1 or 3; defaults to the dimension of the kind
  center: null           # list of coordinates
  radius: null           # support radius a > 0
  amplitude: 1.0
  profile: standard_mollifier   # standard_mollifier | polynomial_bump | product
  order: 8               # exponent of the polynomial bump

quadrature:
  abs_tol: 1.0e-13
  rel_tol: 1.0e-12
  max_refinements: 4000
  pv_window: 0.5
  truncation_radius: 4000.0
  oscillatory_method: panel_series_acceleration   # or complex_contour

sweep:
  parameter: t           # t | m
  start: 0.25
  stop: 2.0
  num: 8

verify:
  checks: []             # empty list runs the default suite (see --list-checks)

output:
  path: null             # null writes to standard output
  format: csv            # csv | json-lines

seed: 0
workers: 1               # concurrent checks; results do not depend on it
"""


class ConfigError(ValueError):
    """Invalid configuration or command line."""


def default_config() -> dict:
    return yaml.safe_load(DEFAULT_CONFIG_TEXT)


def _merge(base: dict, extra: dict, path=""):
    for k, v in extra.items():
        if k not in base:
            raise ConfigError("unknown configuration key %r" % (path + k))
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError("configuration key %r must be a mapping" % (path + k))
            _merge(base[k], v, path + k + ".")
        else:
            base[k] = v


def apply_override(cfg: dict, item: str):
    if "=" not in item:
        raise ConfigError("--set expects key=value, got %r" % item)
    key, raw = item.split("=", 1)
    parts = key.strip().split(".")
    node = cfg
    for p in parts[:-1]:
        if p not in node or not isinstance(node[p], dict):
            raise ConfigError("unknown configuration key %r" % key)
        node = node[p]
    if parts[-1] not in node or isinstance(node[parts[-1]], dict):
        raise ConfigError("unknown configuration key %r" % key)
    try:
        node[parts[-1]] = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError("cannot parse value for %r: %s" % (key, exc)) from exc


def load_config(path=None, overrides=()) -> dict:
    cfg = default_config()
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                user = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError("cannot read config file: %s" % exc) from exc
        except yaml.YAMLError as exc:
            raise ConfigError("config file is not valid YAML: %s" % exc) from exc
        if not isinstance(user, dict):
            raise ConfigError("config file must contain a mapping")
        _merge(cfg, user)
    for item in overrides:
        apply_override(cfg, item)
    return cfg


# ---------------------------------------------------------------------------
# building objects from the config


def _float(sec, key, cfg):
    v = cfg[sec][key]
    try:
        return float(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError("%s.%s must be a number (got %r)" % (sec, key, v)) from exc


def quadrature_config(cfg) -> QuadratureConfig:
    q = cfg["quadrature"]
    try:
        return QuadratureConfig(
            abs_tol=float(q["abs_tol"]), rel_tol=float(q["rel_tol"]),
            max_refinements=int(q["max_refinements"]), pv_window=float(q["pv_window"]),
            truncation_radius=float(q["truncation_radius"]),
            oscillatory_method=str(q["oscillatory_method"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError("quadrature: %s" % exc) from exc


def kind_dimension(kind: str) -> int:
    if kind in SCALAR_KINDS:
        return int(kind[0])
    if kind in MATRIX_KINDS:
        return 3
    raise ConfigError("unknown functional.kind %r; expected one of %s"
                      % (kind, ", ".join(SCALAR_KINDS + MATRIX_KINDS)))


def test_function(cfg, dimension: int) -> BumpFunction:
    tf = cfg["test_function"]
    d = tf["dimension"] if tf["dimension"] is not None else dimension
    if d != dimension:
        raise ConfigError("test_function.dimension = %r does not match the %dD functional" % (d, dimension))
    std = harness.standard_bump(dimension)
    center = tf["center"] if tf["center"] is not None else list(std.center)
    radius = tf["radius"] if tf["radius"] is not None else std.radius
    try:
        return BumpFunction(dimension, tuple(float(c) for c in np.atleast_1d(center)), float(radius),
                            amplitude=float(tf["amplitude"]), profile=str(tf["profile"]),
                            order=int(tf["order"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError("test_function: %s" % exc) from exc


def _check_time(t):
    if not (math.isfinite(t) and t > 0):
        raise ConfigError("functional.t must be a positive finite time (got %r)" % t)


def evaluate_config(cfg, t=None, m=None) -> list[dict]:
    """Evaluate the configured functional or propagator; returns output rows."""
    f = cfg["functional"]
    kind = str(f["kind"])
    dim = kind_dimension(kind)
    t = _float("functional", "t", cfg) if t is None else float(t)
    m = _float("functional", "m", cfg) if m is None else float(m)
    _check_time(t)
    phi = test_function(cfg, dim)
    qc = quadrature_config(cfg)
    echo = {"kind": kind, "t": t, "m": m, "profile": phi.profile,
            "center": list(phi.center), "radius": phi.radius, "amplitude": phi.amplitude}
    if kind in SCALAR_KINDS:
        massive = kind.endswith("massive")
        if massive and not m > 0:
            raise ConfigError("functional.m must be > 0 for %s (got %r)" % (kind, m))
        if not massive and m != 0:
            raise ConfigError("functional.m must be 0 for %s (got %r)" % (kind, m))
        try:
            fk = FunctionalKind(dim, m, str(f["time_sign"]))
        except ValueError as exc:
            raise ConfigError("functional: %s" % exc) from exc
        fv = evaluate(fk, t, phi, qc)
        row = dict(echo, time_sign=fk.time_sign, row=None, col=None)
        row.update(value=fv.value, delta_part=fv.delta_part, kernel_part=fv.kernel_part,
                   error_estimate=fv.error_estimate, converged=fv.converged, method=fv.method)
        return [row]
    try:
        spec = PropagatorSpec(kind, t, m, str(f["form"]))
    except ValueError as exc:
        raise ConfigError("functional: %s" % exc) from exc
    if spec.form == "fw_diagonal":
        res = maxwell_fw_apply(t, phi, qc) if kind == "maxwell" else dirac_fw_apply(spec, phi, qc)
    else:
        method = str(f["method"])
        if method not in ("symbol", "fw_conjugated"):
            raise ConfigError("functional.method must be symbol or fw_conjugated (got %r)" % method)
        if kind == "maxwell":
            res = maxwell_full_momentum_apply(t, phi, method=method)
        else:
            res = dirac_full_momentum_apply(spec, phi, method)
    if not res.converged:
        raise ConvergenceError("%s propagator did not converge" % kind)
    rows = []
    for e in res.as_rows():
        row = dict(echo, time_sign=None, row=e["row"], col=e["col"])
        row.update(value=e["value"], delta_part=None, kernel_part=None,
                   error_estimate=e["error_estimate"], converged=res.converged, method=res.method)
        rows.append(row)
    return rows


def sweep_config(cfg) -> list[dict]:
    s = cfg["sweep"]
    param = s["parameter"]
    if param not in ("t", "m"):
        raise ConfigError("sweep.parameter must be t or m (got %r)" % (param,))
    try:
        num = int(s["num"])
        start, stop = float(s["start"]), float(s["stop"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("sweep: %s" % exc) from exc
    if num < 1:
        raise ConfigError("sweep.num must be at least 1")
    rows = []
    for i, v in enumerate(np.linspace(start, stop, num)):
        kw = {param: float(v)}
        for r in evaluate_config(cfg, **kw):
            r["index"] = i
            rows.append(r)
    return rows


# ---------------------------------------------------------------------------
# output

COLUMNS = ["index", "kind", "time_sign", "t", "m", "row", "col", "value_re", "value_im",
           "delta_re", "delta_im", "kernel_re", "kernel_im", "error_estimate", "converged",
           "method", "profile", "center", "radius", "amplitude"]
CHECK_COLUMNS = ["name", "verdict", "measured", "tolerance"]


def fmt(x) -> str:
    """Shortest round-trip text for numbers; locale independent."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (list, tuple)):
        return " ".join(fmt(v) for v in x)
    return str(x)


def _flatten(row: dict) -> dict:
    out = {"index": row.get("index", 0)}
    for k in ("kind", "time_sign", "t", "m", "row", "col", "error_estimate", "converged",
              "method", "profile", "center", "radius", "amplitude"):
        out[k] = row.get(k)
    for key, base in (("value", "value"), ("delta_part", "delta"), ("kernel_part", "kernel")):
        v = row.get(key)
        out[base + "_re"] = None if v is None else float(np.real(v))
        out[base + "_im"] = None if v is None else float(np.imag(v))
    return out


def render(rows: list[dict], columns, fmt_name: str) -> str:
    buf = io.StringIO()
    if fmt_name == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in columns])
    elif fmt_name == "json-lines":
        for r in rows:
            buf.write(json.dumps({c: r.get(c) for c in columns}, allow_nan=True) + "\n")
    else:
        raise ConfigError("output.format must be csv or json-lines (got %r)" % (fmt_name,))
    return buf.getvalue()


def _emit(text: str, path):
    if path:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError("cannot write output: %s" % exc) from exc
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_eval(cfg) -> int:
    rows = [_flatten(r) for r in evaluate_config(cfg)]
    _emit(render(rows, COLUMNS, cfg["output"]["format"]), cfg["output"]["path"])
    return EXIT_OK


def cmd_sweep(cfg) -> int:
    rows = [_flatten(r) for r in sweep_config(cfg)]
    _emit(render(rows, COLUMNS, cfg["output"]["format"]), cfg["output"]["path"])
    return EXIT_OK


def _selected_checks(cfg):
    names = cfg["verify"]["checks"] or list(harness.DEFAULT_SUITE)
    if isinstance(names, str):
        names = [names]
    unknown = [n for n in names if n not in harness.CHECKS]
    if unknown:
        raise ConfigError("unknown check(s): %s (see --list-checks)" % ", ".join(map(str, unknown)))
    return names


def _run_checks(cfg):
    names = _selected_checks(cfg)
    seed = int(cfg["seed"])
    overrides = {n: harness.CheckSpec(n, seed=seed) for n in names}
    reports = harness.run_suite(names, workers=max(1, int(cfg["workers"])), overrides=overrides)
    for r in reports:
        print(r.line(), file=sys.stderr)
    return reports


def _verify_exit(reports) -> int:
    if any(r.verdict == "fail" for r in reports):
        return EXIT_FAIL
    if any(r.verdict == "inconclusive" for r in reports):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_verify(cfg) -> int:
    reports = _run_checks(cfg)
    rows = [{"name": r.name, "verdict": r.verdict, "measured": r.measured, "tolerance": r.tolerance}
            for r in reports]
    _emit(render(rows, CHECK_COLUMNS, cfg["output"]["format"]), cfg["output"]["path"])
    return _verify_exit(reports)


def cmd_report(cfg) -> int:
    reports = _run_checks(cfg)
    doc = harness.suite_report(reports)
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", cfg["output"]["path"])
    return _verify_exit(reports)


HANDLERS = {"eval": cmd_eval, "verify": cmd_verify, "sweep": cmd_sweep, "report": cmd_report}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcauchy", description="Evaluate and verify quantum Cauchy functionals.")
    p.add_argument("command", nargs="?", choices=COMMANDS, help="overrides the config's command")
    p.add_argument("--config", metavar="PATH", help="YAML run configuration")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[], dest="overrides",
                   help="override a config key, e.g. functional.t=0.5 (repeatable)")
    p.add_argument("--output", metavar="PATH", help="output file (default: standard output)")
    p.add_argument("--format", choices=("csv", "json-lines"), help="row format for eval/sweep/verify")
    p.add_argument("--print-default-config", action="store_true", help="print the annotated defaults and exit")
    p.add_argument("--list-checks", action="store_true", help="list verification checks and exit")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.print_default_config:
        sys.stdout.write(DEFAULT_CONFIG_TEXT)
        return EXIT_OK
    if args.list_checks:
        for name in harness.DEFAULT_SUITE:
            print(name)
        return EXIT_OK
    try:
        cfg = load_config(args.config, args.overrides)
        if args.command:
            cfg["command"] = args.command
        if args.output:
            cfg["output"]["path"] = args.output
        if args.format:
            cfg["output"]["format"] = args.format
        command = cfg["command"]
        if command not in HANDLERS:
            raise ConfigError("command must be one of %s (got %r)" % (", ".join(COMMANDS), command))
        if cfg["output"]["format"] not in ("csv", "json-lines"):
            raise ConfigError("output.format must be csv or json-lines")
        return HANDLERS[command](copy.deepcopy(cfg))
    except ConfigError as exc:
        print("qcauchy: configuration error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print("qcauchy: quadrature did not converge: %s" % exc, file=sys.stderr)
        return EXIT_CONVERGENCE
    except Exception as exc:  # noqa: BLE001
        print("qcauchy: internal error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
