"""Command-line front end: sweeps, distribution tables and the verification suite.

Every command writes CSV (``#`` comment header, then a column line) or JSON
(``{"meta": ..., "rows": [...]}``) to ``--output`` or stdout.

Column orders:

    sweep-chi   u, re, im, deviation        (|chi_closed - computed|)
    work-dist   w, p
    inversion   eps, w, re_formula, re_quad, deviation
    dispersive  u, re, im, deviation        (rho_A distance between the two circuits)
    open        u, re, im, deviation        (|protocol - Kraus form|)
    verify      name, deviation, threshold, passed

Exit codes: 0 success, 2 usage or configuration error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import __version__
from . import dispersive as dm
from . import open_system as osys
from . import quench as qa
from . import tpm
from .errors import QworkError
from .interferometer import gate_general, sweep_char_fn
from .models import random_open_setup, sudden_quench_model
from .states import EPS_TAIL, truncation_dim
from .verification import DEFAULT_SEED, run_all

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 2, 3

COLUMNS = {
    "sweep-chi": ["u", "re", "im", "deviation"],
    "work-dist": ["w", "p"],
    "inversion": ["eps", "w", "re_formula", "re_quad", "deviation"],
    "dispersive": ["u", "re", "im", "deviation"],
    "open": ["u", "re", "im", "deviation"],
    "verify": ["name", "deviation", "threshold", "passed"],
}

WORK_DIST_TOL = 1e-10
INVERSION_TOL = 1e-6
DISPERSIVE_TOL = 1e-10
OPEN_TOL = 1e-10


class ConfigError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


# name -> (type, default); None default means required
PARAMS = {
    "sweep-chi": {"delta_lambda": (float, None), "nbar": (float, None), "lambda0": (float, 1.0),
                  "u_min": (float, 0.0), "u_max": (float, 40.0), "u_points": (int, 400),
                  "mode": (str, "protocol"), "workers": (int, 1)},
    "work-dist": {"delta_lambda": (float, 1.0), "nbar": (float, 1.0), "count": (int, 20),
                  "lambda0": (float, 1.0)},
    "inversion": {"delta_lambda": (float, 1.0), "nbar": (float, 1.0), "eps": (_float_list, "5"),
                  "w": (_float_list, "0.2")},
    "dispersive": {"omega": (float, 1.0), "delta": (float, 20.0), "lambda0": (float, 0.2),
                   "lambda_tau": (float, 0.5), "nbar": (float, 1.5), "u_min": (float, 0.0),
                   "u_max": (float, 40.0), "u_points": (int, 25)},
    "open": {"dim_s": (int, 3), "dim_e": (int, 4), "hse_scale": (float, 0.3), "tau": (float, 2.0),
             "u_min": (float, 0.0), "u_max": (float, 20.0), "u_points": (int, 15)},
    "verify": {"force_tol": (float, None)},
}
OPTIONAL = {("verify", "force_tol")}
COMMON = {"seed": (int, DEFAULT_SEED), "eps_tail": (float, EPS_TAIL), "format": (str, "csv"),
          "output": (str, None)}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="plain-text key=value file; flags take precedence")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--output", help="output path (default: stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--eps-tail", type=float, dest="eps_tail")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qwork", description=__doc__.splitlines()[0],
                                     argument_default=argparse.SUPPRESS)
    parser.add_argument("--version", action="version", version=f"qwork {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, params in PARAMS.items():
        p = sub.add_parser(cmd, argument_default=argparse.SUPPRESS)
        _add_common(p)
        for name in params:
            flag = "--" + name.replace("_", "-")
            if cmd == "sweep-chi" and name == "mode":
                p.add_argument(flag, choices=["protocol", "closed", "direct"])
            else:
                p.add_argument(flag, dest=name)
    return parser


def read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def resolve_config(ns: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags (in increasing precedence) and validate."""
    cmd = ns.command
    given = dict(read_config(ns.config)) if getattr(ns, "config", None) else {}
    given.update({k: v for k, v in vars(ns).items() if k not in ("command", "config")})
    schema = {**PARAMS[cmd], **COMMON}
    unknown = set(given) - set(schema)
    if unknown:
        raise ConfigError(f"unknown parameter(s) for {cmd}: {', '.join(sorted(unknown))}")
    cfg = {}
    for name, (kind, default) in schema.items():
        raw = given.get(name, default)
        if raw is None:
            if (cmd, name) in OPTIONAL or name == "output":
                cfg[name] = None
                continue
            raise ConfigError(f"missing required parameter --{name.replace('_', '-')}")
        try:
            cfg[name] = kind(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    _validate(cmd, cfg)
    return cfg


def _validate(cmd: str, cfg: dict) -> None:
    for k, v in cfg.items():
        vals = v if isinstance(v, list) else [v]
        for x in vals:
            if isinstance(x, float) and not math.isfinite(x):
                raise ConfigError(f"{k} must be finite")
    if not 0 < cfg["eps_tail"] < 1:
        raise ConfigError("eps_tail must lie in (0, 1)")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if "nbar" in cfg and cfg["nbar"] < 0:
        raise ConfigError("nbar must be >= 0")
    if "u_points" in cfg and cfg["u_points"] < 1:
        raise ConfigError("u_points must be >= 1")
    if cmd == "sweep-chi" and cfg["mode"] not in ("protocol", "closed", "direct"):
        raise ConfigError("mode must be protocol, closed or direct")
    if cmd == "work-dist" and cfg["count"] < 1:
        raise ConfigError("count must be >= 1")
    if cmd == "inversion" and (not cfg["eps"] or not cfg["w"] or min(cfg["eps"]) <= 0):
        raise ConfigError("eps must be a non-empty list of positive values and w non-empty")
    if cmd == "open" and (cfg["dim_s"] < 1 or cfg["dim_e"] < 1 or cfg["tau"] < 0):
        raise ConfigError("dim_s, dim_e must be >= 1 and tau >= 0")


def _grid(cfg: dict) -> np.ndarray:
    return np.linspace(cfg["u_min"], cfg["u_max"], cfg["u_points"])


def cmd_sweep_chi(cfg: dict):
    p = qa.QuenchParams(cfg["delta_lambda"], cfg["nbar"])
    u = _grid(cfg)
    closed = qa.chi_closed(u, p)
    if cfg["mode"] == "closed":
        re, im = qa.chi_re_im_closed(u, p)
        chi = re + 1j * im
    else:
        m = sudden_quench_model(p.delta_lambda, p.nbar, lambda0=cfg["lambda0"], eps_tail=cfg["eps_tail"])
        if cfg["mode"] == "protocol":
            samples = sweep_char_fn(lambda x: gate_general(x, m.u_tau, m.h_i, m.h_f), m.rho, u,
                                    workers=cfg["workers"])
            chi = np.array([s.chi for s in samples])
        else:
            chi = np.array([tpm.char_fn_direct(m.rho, m.u_tau, m.h_i, m.h_f, x) for x in u])
    rows = [(float(x), float(c.real), float(c.imag), float(abs(c - k))) for x, c, k in zip(u, chi, closed)]
    return rows, True


def cmd_work_dist(cfg: dict):
    p = qa.QuenchParams(cfg["delta_lambda"], cfg["nbar"])
    peaks = qa.peak_weights(p, cfg["count"])
    m = sudden_quench_model(p.delta_lambda, p.nbar, lambda0=cfg["lambda0"], eps_tail=cfg["eps_tail"])
    dist = tpm.work_distribution(tpm.joint_probabilities(m.rho, m.u_tau, m.h_i, m.h_f))
    k = min(len(peaks), len(dist))
    dev = max(float(np.max(np.abs(dist.p[:k] - peaks.p[:k]))), float(np.max(np.abs(dist.w[:k] - peaks.w[:k]))))
    rows = [(float(w), float(x)) for w, x in zip(peaks.w, peaks.p)]
    return rows, dev < WORK_DIST_TOL


def cmd_inversion(cfg: dict):
    p = qa.QuenchParams(cfg["delta_lambda"], cfg["nbar"])
    rows = []
    ok = True
    for eps in cfg["eps"]:
        for w in cfg["w"]:
            formula = qa.partial_inversion_formula(eps, w, p)
            quad = qa.partial_inversion_quadrature(eps, w, lambda x: qa.chi_closed(x, p))
            dev = abs(formula - quad)
            ok &= dev < INVERSION_TOL
            rows.append((eps, w, formula.real, quad.real, float(dev)))
    return rows, ok


def cmd_dispersive(cfg: dict):
    nmax = max(1, truncation_dim(cfg["nbar"], cfg["eps_tail"]))
    rho = dm.thermal_input(cfg["omega"], cfg["lambda0"], cfg["nbar"], nmax)
    rows = []
    for u in _grid(cfg):
        dev, (chi,) = dm.protocol_equivalence([u], cfg["omega"], cfg["delta"], cfg["lambda0"],
                                              cfg["lambda_tau"], nmax, rho)
        rows.append((float(u), chi.real, chi.imag, dev))
    return rows, max(r[3] for r in rows) < DISPERSIVE_TOL


def cmd_open(cfg: dict):
    rng = np.random.default_rng(cfg["seed"])
    s = random_open_setup(cfg["dim_s"], cfg["dim_e"], rng, coupling=cfg["hse_scale"], tau=cfg["tau"])
    ut = osys.u_se(s)
    ks = osys.kraus_from_use(ut, s.rho_e)
    rows = []
    for u in _grid(cfg):
        chi = osys.run_protocol_open(s, u, ut).chi
        rows.append((float(u), chi.real, chi.imag, abs(chi - osys.char_fn_open_direct(s, u, ks))))
    return rows, max(r[3] for r in rows) < OPEN_TOL


def cmd_verify(cfg: dict):
    checks = run_all(seed=cfg["seed"], eps_tail=cfg["eps_tail"], force_tol=cfg["force_tol"])
    rows = [(c.name, c.deviation, c.threshold, c.passed) for c in checks]
    return rows, all(c.passed for c in checks)


COMMANDS = {"sweep-chi": cmd_sweep_chi, "work-dist": cmd_work_dist, "inversion": cmd_inversion,
            "dispersive": cmd_dispersive, "open": cmd_open, "verify": cmd_verify}


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def render(command: str, cfg: dict, rows, passed: bool) -> str:
    cols = COLUMNS[command]
    meta = {"command": command, "config": {k: v for k, v in cfg.items() if k != "output"},
            "version": __version__, "seed": cfg["seed"], "eps_tail": cfg["eps_tail"],
            "columns": cols, "passed": bool(passed)}
    if cfg["format"] == "json":
        records = [{c: (bool(v) if isinstance(v, (bool, np.bool_)) else v) for c, v in zip(cols, r)}
                   for r in rows]
        return json.dumps({"meta": meta, "rows": records}, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# command: {command}\n")
    buf.write(f"# config: {json.dumps(meta['config'], sort_keys=True)}\n")
    buf.write(f"# version: {__version__}\n")
    buf.write(f"# seed: {cfg['seed']}\n")
    buf.write(f"# eps_tail: {_fmt(cfg['eps_tail'])}\n")
    buf.write(f"# passed: {_fmt(bool(passed))}\n")
    buf.write(",".join(cols) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(x) for x in r) + "\n")
    return buf.getvalue()


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(ns)
        rows, passed = COMMANDS[ns.command](cfg)
    except (ConfigError, QworkError, OSError) as exc:
        print(f"qwork {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(ns.command, cfg, rows, passed)
    if cfg["output"]:
        with open(cfg["output"], "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not passed:
        print(f"qwork {ns.command}: verification failed", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
