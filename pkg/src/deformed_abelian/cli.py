"""Command line front end: ``deformed-abelian {phi,pair,intersect,check,classical}``.

Configuration is a YAML document::

    xi: 2.0
    n: 2
    beta: [-1.0, -0.3, 0.4, 1.2]
    quadrature: {target_rel_err: 1.0e-10}
    tolerances: {bilinear_identity: 1.0e-6}
    precision_mode: double
    seed: 0

Unknown keys are rejected.  Exit codes: 0 success (all checks pass),
1 a check failed, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import re
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import scipy
import yaml

from . import __version__
from .identities import CHECK_NAMES, DEFAULT_TOLERANCES, CheckReport, check_suite, classical_limit_scan
from .pairing import DeformedPeriods, max_delta
from .phi import PhiEvaluator
from .quad import QuadratureSpec
from .sympoly import DegeneracyError, Params, Poly

__all__ = ["Config", "ConfigError", "parse_config", "dump_config", "emit_report", "main"]

PRECISION_MODES = ("double",)


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class Config:
    xi: float
    n: int
    beta: tuple
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    tolerances: dict = field(default_factory=dict)
    precision_mode: str = "double"
    seed: int = 0

    @property
    def params(self):
        return Params(xi=self.xi, n=self.n, beta=self.beta)

    def to_dict(self):
        return {
            "xi": self.xi,
            "n": self.n,
            "beta": list(self.beta),
            "quadrature": {f.name: getattr(self.quadrature, f.name) for f in fields(QuadratureSpec)},
            "tolerances": dict(self.tolerances),
            "precision_mode": self.precision_mode,
            "seed": self.seed,
        }


_REQUIRED = ("xi", "n", "beta")
_OPTIONAL = ("quadrature", "tolerances", "precision_mode", "seed")


_EXP_FLOAT = re.compile(r"[-+]?\d+(\.\d*)?[eE][-+]?\d+")


def _number(key, value, kind=float):
    # YAML 1.1 reads 1e-10 (no dot) as a string; JSON writes floats that way
    if isinstance(value, str) and _EXP_FLOAT.fullmatch(value.strip()):
        value = float(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite")
    return float(value)


def config_from_dict(doc):
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "expected a mapping")
    unknown = set(doc) - set(_REQUIRED) - set(_OPTIONAL)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    for key in _REQUIRED:
        if key not in doc:
            raise ConfigError(key, "missing required key")
    xi = _number("xi", doc["xi"])
    if xi <= 0:
        raise ConfigError("xi", "must be positive")
    n = _number("n", doc["n"], int)
    if n < 1:
        raise ConfigError("n", "must be >= 1")
    beta = doc["beta"]
    if not isinstance(beta, list):
        raise ConfigError("beta", "expected a list")
    beta = tuple(_number(f"beta[{i}]", b) for i, b in enumerate(beta))
    if len(beta) != 2 * n:
        raise ConfigError("beta", f"expected 2n = {2 * n} entries, got {len(beta)}")
    if any(y <= x for x, y in zip(beta, beta[1:])):
        raise ConfigError("beta", "must be strictly increasing")

    qdoc = doc.get("quadrature") or {}
    if not isinstance(qdoc, dict):
        raise ConfigError("quadrature", "expected a mapping")
    allowed = {f.name: f.type for f in fields(QuadratureSpec)}
    qkw = {}
    for key, value in qdoc.items():
        if key not in allowed:
            raise ConfigError(f"quadrature.{key}", "unknown key")
        kind = int if key in ("max_depth", "nodes_per_panel") else float
        qkw[key] = _number(f"quadrature.{key}", value, kind)
    try:
        quad = QuadratureSpec(**qkw)
    except ValueError as exc:
        raise ConfigError("quadrature", str(exc)) from None

    tdoc = doc.get("tolerances") or {}
    if not isinstance(tdoc, dict):
        raise ConfigError("tolerances", "expected a mapping")
    tol = {}
    for key, value in tdoc.items():
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"tolerances.{key}", "unknown check name")
        tol[key] = _number(f"tolerances.{key}", value)
        if tol[key] <= 0:
            raise ConfigError(f"tolerances.{key}", "must be positive")

    mode = doc.get("precision_mode", "double")
    if mode not in PRECISION_MODES:
        raise ConfigError("precision_mode", f"expected one of {PRECISION_MODES}, got {mode!r}")
    seed = _number("seed", doc.get("seed", 0), int)

    try:
        Params(xi=xi, n=n, beta=beta)
    except DegeneracyError as exc:
        raise ConfigError("xi", str(exc)) from None
    return Config(xi, n, beta, quad, tol, mode, seed)


def parse_config(path):
    """Read and validate a YAML configuration file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"not valid YAML: {exc}") from None
    return config_from_dict(doc)


def dump_config(config, path):
    Path(path).write_text(yaml.safe_dump(config.to_dict(), sort_keys=False))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _environment():
    return {
        "package": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def emit_report(report, path=None):
    """Write a check report (or any result mapping) as JSON; ``path=None`` means stdout."""
    doc = report.to_dict() if isinstance(report, CheckReport) else dict(report)
    doc = _jsonable({**doc, "environment": _environment()})
    text = json.dumps(doc, indent=2)
    if path is None or str(path) == "-":
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n")
    return doc


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _grid_exports(config, outdir):
    """phi samples and the monomial pairing table for a configuration."""
    params = config.params
    phi = PhiEvaluator(params.xi)
    rng = np.random.default_rng([config.seed, 99])
    rows = []
    for z in rng.uniform(-2, 2, 16) + 1j * rng.uniform(-0.6, 0.6, 16):
        base, prod = phi.phi(z, path="base"), phi.phi(z, path="product")
        rows.append([z.real, z.imag, prod.real, prod.imag, abs(base - prod)])
    _write_csv(Path(outdir) / "phi_samples.csv", ["alpha_re", "alpha_im", "re", "im", "err"], rows)
    eng = DeformedPeriods(params, phi, config.quadrature)
    rows = []
    for p in range(params.n):
        for k in range(1, 2 * params.n):
            r = eng.pair(Poly.monomial(p, "a"), Poly.monomial(k, "A"))
            rows.append([p, k, r.value.real, r.value.imag, r.abs_error])
    _write_csv(Path(outdir) / "pairing_table.csv", ["p", "k", "re", "im", "err"], rows)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _coeffs(text, var):
    try:
        vals = [complex(t.strip().replace(" ", "")) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"--{'Q' if var == 'a' else 'L'}", f"cannot parse coefficients {text!r}") from None
    return Poly(vals, var)


def _load(args):
    if args.config is None:
        raise ConfigError("--config", "this command needs a configuration file")
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg = Config(cfg.xi, cfg.n, cfg.beta, cfg.quadrature, cfg.tolerances, cfg.precision_mode, args.seed)
    if args.precision is not None and args.precision != cfg.precision_mode:
        cfg = Config(cfg.xi, cfg.n, cfg.beta, cfg.quadrature, cfg.tolerances, args.precision, cfg.seed)
    return cfg


def _cmd_phi(args):
    if args.xi is None:
        xi = _load(args).xi
    else:
        xi = args.xi
        if not xi > 0:
            raise ConfigError("--xi", "must be positive")
    try:
        re, im = (float(t) for t in args.alpha.split(","))
    except ValueError:
        raise ConfigError("--alpha", "expected RE,IM") from None
    alpha = complex(re, im)
    phi = PhiEvaluator(xi)
    values = {}
    for path in ("base", "product", "shift"):
        try:
            values[path] = complex(phi.phi(alpha, path=path))
        except ValueError as exc:
            values[path] = None
            if path == args.path:
                raise ConfigError("--alpha", str(exc)) from None
    chosen = values[args.path]
    others = [v for v in values.values() if v is not None]
    spread = max(abs(v - chosen) for v in others) / abs(chosen)
    emit_report({"command": "phi", "xi": xi, "alpha": alpha, "path": args.path, "value": chosen,
                 "paths": values, "spread": spread, "C": phi.C}, args.report)
    return 0


def _cmd_pair(args):
    cfg = _load(args)
    Q = _coeffs(args.Q, "a")
    L = _coeffs(args.L, "A")
    params = cfg.params
    if args.delta is not None and not 0 < args.delta < max_delta(params.xi):
        raise ConfigError("--delta", f"must lie in (0, {max_delta(params.xi):.6g})")
    eng = DeformedPeriods(params, quad=cfg.quadrature, delta=args.delta)
    r = eng.pair_regularized(Q, L) if args.regularized else eng.pair(Q, L)
    emit_report({"command": "pair", "config": cfg.to_dict(), "Q": list(Q.coef), "L": list(L.coef),
                 "value": r.value, "error": r.abs_error, "scale": r.scale, "method": r.method,
                 "log_scale": r.log_scale}, args.report)
    return 0


def _cmd_intersect(args):
    cfg = _load(args)
    L = _coeffs(args.L, "A")
    M = _coeffs(args.M, "A")
    eng = DeformedPeriods(cfg.params, quad=cfg.quadrature)
    q = eng.intersection_quadrature(L, M)
    r = eng.intersection_residues(L, M)
    emit_report({"command": "intersect", "config": cfg.to_dict(), "L": list(L.coef), "M": list(M.coef),
                 "value": r, "quadrature": q, "error": abs(q - r), "scale": abs(r), "method": "residues"},
                args.report)
    return 0


def _cmd_check(args):
    cfg = _load(args)
    only = None
    if args.only:
        only = [s.strip() for s in args.only.split(",") if s.strip()]
        bad = [s for s in only if s not in CHECK_NAMES]
        if bad:
            raise ConfigError("--only", f"unknown check names {bad}")
    report = check_suite(cfg.params, cfg.tolerances, seed=cfg.seed, only=only, quad=cfg.quadrature,
                         precision_mode=cfg.precision_mode)
    doc = report.to_dict()
    doc["config"] = cfg.to_dict()
    emit_report(doc, args.report)
    if args.csv:
        _write_csv(Path(args.csv) / "checks.csv",
                   ["name", "residual", "scale", "tolerance", "verdict", "wall_time"],
                   [[r.name, r.residual, r.scale, r.tolerance, r.verdict, r.wall_time] for r in report.records])
        _grid_exports(cfg, args.csv)
    return 0 if report.passed else 1


def _cmd_classical(args):
    cfg = _load(args)
    try:
        xis = [float(t) for t in args.scan.split(",")]
    except ValueError:
        raise ConfigError("--scan", "expected comma-separated xi values") from None
    b = cfg.params.b
    try:
        rows = classical_limit_scan(b, xis, args.p, args.p_alt, args.k, args.k_alt, quad=cfg.quadrature)
    except ValueError as exc:
        raise ConfigError("--scan", str(exc)) from None
    dev1 = [r.dev1 for r in rows]
    dev2 = [r.dev2 for r in rows]
    decreasing = all(y < x for x, y in zip(dev1, dev1[1:])) and all(y < x for x, y in zip(dev2, dev2[1:]))
    emit_report({"command": "classical", "b": list(b), "rows": [r.__dict__ for r in rows],
                 "strictly_decreasing": decreasing}, args.report)
    if args.csv:
        _write_csv(Path(args.csv) / "classical_scan.csv",
                   ["xi", "r1", "r1_classical", "dev1", "r2", "r2_classical", "dev2"],
                   [[r.xi, r.r1, r.r1_classical, r.dev1, r.r2, r.r2_classical, r.dev2] for r in rows])
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument("--report", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="directory for CSV grid exports")
    common.add_argument("--precision", choices=PRECISION_MODES, help="arithmetic mode")
    common.add_argument("--seed", type=int, help="override the configuration seed")

    parser = argparse.ArgumentParser(prog="deformed-abelian", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phi", parents=[common], help="evaluate phi along all paths")
    p.add_argument("--xi", type=float)
    p.add_argument("--alpha", required=True, help="RE,IM")
    p.add_argument("--path", choices=("base", "product", "shift"), default="product")
    p.set_defaults(func=_cmd_phi)

    p = sub.add_parser("pair", parents=[common], help="deformed period <Q, L>")
    p.add_argument("--Q", required=True, help="coefficients of Q(a), ascending, comma separated")
    p.add_argument("--L", required=True, help="coefficients of L(A), ascending, comma separated")
    p.add_argument("--regularized", action="store_true")
    p.add_argument("--delta", type=float)
    p.set_defaults(func=_cmd_pair)

    p = sub.add_parser("intersect", parents=[common], help="intersection number L o M")
    p.add_argument("--L", required=True)
    p.add_argument("--M", required=True)
    p.set_defaults(func=_cmd_intersect)

    p = sub.add_parser("check", parents=[common], help="run the identity suite")
    p.add_argument("--only", help="comma-separated subset of checks")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("classical", parents=[common], help="scan the xi -> inf limit")
    p.add_argument("--scan", required=True, help="increasing xi values, comma separated")
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--p-alt", dest="p_alt", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--k-alt", dest="k_alt", type=int, default=2)
    p.set_defaults(func=_cmd_classical)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
