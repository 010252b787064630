"""Config-driven scenario runner: ``spectral-lab <subcommand> --config <path>``.

Exit codes: 0 success, 1 a pass/fail check failed, 2 config could not be
parsed, 3 config failed validation, 4 the computation itself failed.
Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .action import (
    ActionConfig,
    CutoffFunction,
    FermionState,
    bosonic_action,
    circle_spectrum,
    cross_term_quadratic,
    extended_action,
    fermionic_action,
    perturbative_expansion,
    weyl_scan,
    weyl_slope,
)
from .errors import SpectralLabError
from .leptons import (
    HiggsDoublet,
    LeptonDoublet,
    LeptonModelParams,
    build_lepton_triple,
    check_intertwine,
    gauge_transform,
    invariant_term,
    light_neutrino_mass,
    neutrino_mass_estimate,
    physical_projector,
    sample_su2,
    weinberg_term,
)
from .linalg import DEFAULT_TOL, matrix_from_literal, vector_from_literal
from .triple import AXIOMS, check_axioms, triple_from_dict

COMMANDS = (
    "check-axioms",
    "bosonic-action",
    "fermionic-action",
    "extended-action",
    "expand",
    "verify-identity",
    "gauge-invariance",
    "mass-estimate",
    "weyl-scan",
)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_PARSE, EXIT_VALIDATION, EXIT_COMPUTE = 0, 1, 2, 3, 4

# Allowed keys per config section.
SCHEMA = {
    "triple": {"source", "d", "gamma", "j_unitary", "generators", "ko_dim", "labels"},
    "model": {"y_e", "y_nu", "v_gev", "include_sterile", "m_r_gev", "kappa", "lambda_gev", "sterile_in_algebra"},
    "action": {"lambda", "cutoff", "physical_projector"},
    "state": {"psi", "zero"},
    "options": {
        "tol", "depth", "order", "samples",
        "lambda_min", "lambda_max", "steps", "n_min", "n_max", "spectrum",
    },
}
MODEL_KEYS = {
    "y_e": "y_e", "y_nu": "y_nu", "v_gev": "v", "include_sterile": "include_sterile",
    "m_r_gev": "m_r", "kappa": "kappa", "sterile_in_algebra": "sterile_in_algebra",
}


class ConfigParseError(Exception):
    pass


class ValidationError(Exception):
    pass


class ComputeError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    inputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    table: tuple | None = None  # (header, rows)
    version: str = __version__
    duration_s: float = 0.0

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def records(self) -> dict:
        out = {"command": self.command, "version": self.version, "duration_s": self.duration_s}
        for prefix, section in (("input", self.inputs), ("result", self.results),
                                ("residual", self.residuals), ("pass", self.checks)):
            for k, v in section.items():
                out[f"{prefix}.{k}"] = v
        return dict(sorted(out.items()))


def format_value(v) -> str:
    """Locale-independent text for one report value (12 significant digits)."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".12g")
    return str(v)


def _json_token(v) -> str:
    if isinstance(v, (bool, int, float, np.integer, np.floating)):
        s = format_value(v)
        return json.dumps(s) if s in ("nan", "inf", "-inf") else s
    return json.dumps(str(v))


def render(report: RunReport, fmt: str) -> str:
    recs = report.records()
    if fmt == "json":
        items = [f"  {json.dumps(k)}: {_json_token(v)}" for k, v in recs.items()]
        if report.table is not None:
            header, rows = report.table
            for i, name in enumerate(header):
                col = ", ".join(_json_token(r[i]) for r in rows)
                items.append(f"  {json.dumps('table.' + name)}: [{col}]")
            items.sort()
        return "{\n" + ",\n".join(items) + "\n}\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if report.table is not None:
            header, rows = report.table
            w.writerow(header)
            w.writerows([format_value(x) for x in r] for r in rows)
        else:
            w.writerow(["key", "value"])
            w.writerows([k, format_value(v)] for k, v in recs.items())
        return buf.getvalue()
    lines = [f"{k} = {format_value(v)}" for k, v in recs.items()]
    if report.table is not None:
        header, rows = report.table
        lines += ["", "  ".join(header)]
        lines += ["  ".join(format_value(x) for x in r) for r in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- config


def _parse_scalar(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigParseError(f"--set expects key=value, got {assignment!r}")
    key, value = assignment.split("=", 1)
    parts = key.strip().split(".")
    if not all(parts):
        raise ConfigParseError(f"--set has an empty key segment in {key!r}")
    node = cfg
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigParseError(f"--set {key}: {p!r} is not a section")
    node[parts[-1]] = _parse_scalar(value)


def load_config(path: str | None, overrides=()) -> dict:
    cfg = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigParseError(f"cannot read config {path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(cfg, dict):
            raise ConfigParseError(f"{path}: top level must be an object")
    for a in overrides:
        apply_override(cfg, a)
    for section, value in cfg.items():
        if section not in SCHEMA:
            raise ConfigParseError(f"unknown config key {section!r}")
        if not isinstance(value, dict):
            raise ConfigParseError(f"config key {section!r} must be a section (object)")
        for k in value:
            if k not in SCHEMA[section]:
                raise ConfigParseError(f"unknown config key '{section}.{k}'")
    return cfg


def _echo(cfg: dict) -> dict:
    out = {}

    def walk(prefix, node):
        if isinstance(node, dict):
            for k, v in node.items():
                walk(f"{prefix}.{k}" if prefix else k, v)
        elif isinstance(node, list):
            if len(node) <= 16 and all(isinstance(x, (int, float)) for x in node):
                out[prefix] = json.dumps(node)
            else:
                out[prefix + ".len"] = len(node)
        else:
            out[prefix] = node

    walk("", cfg)
    return out


def _model_params(cfg: dict) -> LeptonModelParams:
    m = cfg.get("model", {})
    kwargs = {MODEL_KEYS[k]: v for k, v in m.items() if k in MODEL_KEYS}
    for k in ("y_e", "y_nu", "v", "m_r", "kappa"):
        if k in kwargs and isinstance(kwargs[k], int) and not isinstance(kwargs[k], bool):
            kwargs[k] = float(kwargs[k])
    for k in ("include_sterile", "sterile_in_algebra"):
        if k in kwargs and not isinstance(kwargs[k], bool):
            raise ValidationError(f"model.{'include_sterile' if k == 'include_sterile' else k} must be true or false")
    if kwargs.get("m_r", 0) or kwargs.get("y_nu", 0):
        kwargs.setdefault("include_sterile", True)
    return LeptonModelParams(**kwargs)


def _triple_section(cfg: dict):
    """Returns (triple or None, dirac matrix, model params or None)."""
    sec = cfg.get("triple", {"source": "lepton"})
    source = sec.get("source", "lepton")
    if source == "lepton":
        extra = set(sec) - {"source"}
        if extra:
            raise ValidationError(f"triple.source = lepton takes no inline data (found {', '.join(sorted(extra))})")
        p = _model_params(cfg)
        t = build_lepton_triple(p)
        return t, t.d, p
    if source == "inline":
        data = {k: v for k, v in sec.items() if k != "source"}
        try:
            t = triple_from_dict(data)
        except KeyError as exc:
            raise ValidationError(f"triple: {exc.args[0]}") from exc
        return t, t.d, None
    if source == "matrix":
        extra = set(sec) - {"source", "d"}
        if extra or "d" not in sec:
            raise ValidationError("triple.source = matrix needs exactly the key triple.d")
        return None, matrix_from_literal(sec["d"]), None
    raise ValidationError(f"triple.source must be lepton, inline or matrix, got {source!r}")


def _action_config(cfg: dict, dim: int, params) -> ActionConfig:
    sec = cfg.get("action", {})
    cutoff = CutoffFunction.from_dict(sec.get("cutoff", {"kind": "gaussian"}))
    proj = sec.get("physical_projector", "none")
    if proj == "none":
        pi = None
    elif proj == "physical":
        if params is None:
            raise ValidationError("action.physical_projector = physical needs triple.source = lepton")
        pi = physical_projector(params)
    else:
        pi = matrix_from_literal(proj)
    if pi is not None and pi.shape[0] != dim:
        raise ValidationError(f"action.physical_projector has dim {pi.shape[0]}, Hilbert space has {dim}")
    lam = sec.get("lambda", 1.0)
    if not isinstance(lam, (int, float)) or isinstance(lam, bool):
        raise ValidationError(f"action.lambda must be a number, got {lam!r}")
    return ActionConfig(float(lam), cutoff, pi)


def _state(cfg: dict, dim: int) -> FermionState:
    sec = cfg.get("state")
    if sec is None:
        raise ValidationError("this command needs a state section")
    if sec.get("zero", False):
        if "psi" in sec:
            raise ValidationError("state.zero and state.psi are mutually exclusive")
        return FermionState.zero(dim)
    if "psi" not in sec:
        raise ValidationError("state needs psi (list of [re, im] pairs) or zero = true")
    psi = vector_from_literal(sec["psi"])
    if psi.shape[0] != dim:
        raise ValidationError(f"state.psi has length {psi.shape[0]}, Hilbert space has dimension {dim}")
    return FermionState(psi)


def _option(cfg: dict, key: str, default, kind=float):
    v = cfg.get("options", {}).get(key, default)
    if kind is int and not (isinstance(v, int) and not isinstance(v, bool)):
        raise ValidationError(f"options.{key} must be an integer, got {v!r}")
    if kind is float and not (isinstance(v, (int, float)) and not isinstance(v, bool)):
        raise ValidationError(f"options.{key} must be a number, got {v!r}")
    return kind(v)


# ---------------------------------------------------------------- commands


def _cmd_check_axioms(cfg, tol, seed, rep):
    t, _, _ = _triple_section(cfg)
    if t is None:
        raise ValidationError("check-axioms needs a full triple (source lepton or inline)")
    r = check_axioms(t, tol, depth=_option(cfg, "depth", 2, int))
    rep.results["hilbert_dim"] = t.hilbert_dim
    rep.results["ko_dim"] = t.ko_dim
    rep.results["worst_offender"] = r.worst_offender()
    for k in AXIOMS:
        rep.residuals[k] = r.residuals[k]
        rep.checks[k] = r.passed[k]


def _cmd_bosonic(cfg, tol, seed, rep):
    t, d, p = _triple_section(cfg)
    ac = _action_config(cfg, d.shape[0], p)
    rep.results["bosonic_action"] = bosonic_action(d, ac, tol)


def _cmd_fermionic(cfg, tol, seed, rep):
    t, d, p = _triple_section(cfg)
    rep.results["fermionic_action"] = fermionic_action(d, _state(cfg, d.shape[0]))


def _cmd_extended(cfg, tol, seed, rep):
    t, d, p = _triple_section(cfg)
    ac = _action_config(cfg, d.shape[0], p)
    psi = _state(cfg, d.shape[0])
    s = extended_action(d, psi, ac, tol)
    s0 = bosonic_action(d, ac, tol)
    rep.results["extended_action"] = s
    rep.results["bosonic_action"] = s0
    rep.results["fermion_correction"] = s - s0


def _cmd_expand(cfg, tol, seed, rep):
    t, d, p = _triple_section(cfg)
    ac = _action_config(cfg, d.shape[0], p)
    psi = _state(cfg, d.shape[0])
    order = _option(cfg, "order", 2, int)
    coeffs = perturbative_expansion(d, psi, ac, order, tol)
    for i, c in enumerate(coeffs):
        rep.results[f"c{i}"] = c
    partial = math.fsum(coeffs)
    exact = extended_action(d, psi, ac, tol)
    rep.results["partial_sum"] = partial
    rep.results["extended_action"] = exact
    rep.residuals["truncation"] = abs(exact - partial)


def _cmd_verify_identity(cfg, tol, seed, rep):
    t, d, p = _triple_section(cfg)
    r = cross_term_quadratic(d, _state(cfg, d.shape[0]))
    rep.results.update(r.as_record())
    rep.residuals["derived"] = abs(r.derived_discrepancy)
    rep.checks["derived_identity"] = abs(r.derived_discrepancy) <= tol * max(1.0, abs(r.lhs))


def _cmd_gauge_invariance(cfg, tol, seed, rep):
    n = _option(cfg, "samples", 1000, int)
    if n <= 0:
        raise ValidationError("options.samples must be positive")
    p = _model_params(cfg)
    rng = np.random.default_rng(seed)
    inv = interw = wein = 0.0
    for k in range(n):
        g = sample_su2(int(rng.integers(2**63 - 1)))
        amps = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        l, h = LeptonDoublet(amps[0], amps[1]), HiggsDoublet(amps[2], amps[3])
        l2, h2 = gauge_transform(l, h, g)
        inv = max(inv, abs(abs(invariant_term(h2, l2)) - abs(invariant_term(h, l))))
        interw = max(interw, check_intertwine(g.h))
        w0 = abs(weinberg_term(p, l, h))
        wein = max(wein, abs(abs(weinberg_term(p, l2, h2)) - w0) / max(1.0, w0))
    rep.results["samples"] = n
    rep.residuals["invariant_term"] = inv
    rep.residuals["intertwine"] = interw
    rep.residuals["weinberg_term"] = wein
    rep.checks["invariant_term"] = inv <= 1e-12
    rep.checks["intertwine"] = interw <= 1e-12
    rep.checks["weinberg_term"] = wein <= 1e-10


def _cmd_mass_estimate(cfg, tol, seed, rep):
    p = _model_params(cfg)
    lam = cfg.get("model", {}).get("lambda_gev", 1e15)
    if not isinstance(lam, (int, float)) or isinstance(lam, bool):
        raise ValidationError(f"model.lambda_gev must be a number, got {lam!r}")
    m = neutrino_mass_estimate(p.kappa, p.v, float(lam))
    rep.results["mass_ev"] = m
    rep.results["log10_mass_ev"] = math.log10(m) if m > 0 else -math.inf
    if p.include_sterile and p.m_r > 0:
        light = light_neutrino_mass(p)
        approx = p.m_dirac**2 / p.m_r
        rep.results["seesaw_light_mass_gev"] = light
        rep.results["seesaw_approx_gev"] = approx
        rep.residuals["seesaw_relative"] = abs(light - approx) / light if light else math.inf


def _cmd_weyl_scan(cfg, tol, seed, rep, lam_min=None, lam_max=None, steps=None):
    opts = cfg.get("options", {})
    if "spectrum" in opts:
        spec = np.asarray(opts["spectrum"], dtype=float)
    else:
        n_max = _option(cfg, "n_max", 5000, int)
        n_min = _option(cfg, "n_min", -n_max, int)
        spec = circle_spectrum(n_min, n_max)
    lo = lam_min if lam_min is not None else _option(cfg, "lambda_min", 10.0)
    hi = lam_max if lam_max is not None else _option(cfg, "lambda_max", 40.0)
    k = steps if steps is not None else _option(cfg, "steps", 31, int)
    if not (0 < lo < hi) or k < 2:
        raise ValidationError("weyl-scan needs 0 < lambda_min < lambda_max and steps >= 2")
    grid = np.linspace(lo, hi, k)
    counts = weyl_scan(spec, grid)
    rep.inputs["lambda_min"], rep.inputs["lambda_max"], rep.inputs["steps"] = lo, hi, k
    rep.results["slope"] = weyl_slope(spec, lo, hi, k)
    rep.results["spectrum_size"] = int(spec.size)
    rep.table = (("lambda", "count"), [(float(a), int(c)) for a, c in zip(grid, counts)])


HANDLERS = {
    "check-axioms": _cmd_check_axioms,
    "bosonic-action": _cmd_bosonic,
    "fermionic-action": _cmd_fermionic,
    "extended-action": _cmd_extended,
    "expand": _cmd_expand,
    "verify-identity": _cmd_verify_identity,
    "gauge-invariance": _cmd_gauge_invariance,
    "mass-estimate": _cmd_mass_estimate,
    "weyl-scan": _cmd_weyl_scan,
}


def default_tol() -> float:
    raw = os.environ.get("SPECTRAL_LAB_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError as exc:
        raise ConfigParseError(f"SPECTRAL_LAB_TOL is not a number: {raw!r}") from exc
    if not tol > 0:
        raise ConfigParseError(f"SPECTRAL_LAB_TOL must be positive, got {raw!r}")
    return tol


def run_scenario(command: str, cfg: dict, seed: int = 0, **extra) -> RunReport:
    """Run one subcommand on an already-loaded config.

    Raises ValidationError for bad inputs and ComputeError for numerical
    failures; check failures are reported through ``RunReport.checks``.
    """
    if command not in HANDLERS:
        raise ValidationError(f"unknown command {command!r}")
    t0 = time.perf_counter()
    rep = RunReport(command)
    rep.inputs.update(_echo(cfg))
    rep.inputs["seed"] = seed
    tol = cfg.get("options", {}).get("tol", default_tol())
    if not isinstance(tol, (int, float)) or isinstance(tol, bool) or not tol > 0:
        raise ValidationError(f"options.tol must be a positive number, got {tol!r}")
    rep.inputs["tol"] = float(tol)
    try:
        HANDLERS[command](cfg, float(tol), seed, rep, **extra)
    except (ValidationError, ComputeError):
        raise
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        raise ComputeError(str(exc)) from exc
    except (SpectralLabError, ValueError, KeyError, TypeError) as exc:
        raise ValidationError(str(exc)) from exc
    rep.duration_s = time.perf_counter() - t0
    return rep


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spectral-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="subcommand")
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON scenario file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config value, e.g. action.lambda=2")
        sp.add_argument("--format", choices=("json", "csv", "text"), default="text")
        sp.add_argument("--seed", type=int, default=0)
        if name == "weyl-scan":
            sp.add_argument("--lambda-min", type=float)
            sp.add_argument("--lambda-max", type=float)
            sp.add_argument("--steps", type=int)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    extra = {}
    if args.command == "weyl-scan":
        extra = {"lam_min": args.lambda_min, "lam_max": args.lambda_max, "steps": args.steps}
    try:
        cfg = load_config(args.config, args.set)
        report = run_scenario(args.command, cfg, args.seed, **extra)
    except ConfigParseError as exc:
        print(f"spectral-lab: config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"spectral-lab: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ComputeError as exc:
        print(f"spectral-lab: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    sys.stdout.write(render(report, args.format))
    if not report.ok:
        failed = ", ".join(k for k, v in report.checks.items() if not v)
        print(f"spectral-lab: check(s) failed: {failed}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
