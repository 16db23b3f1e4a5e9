"""Command-line interface.

Every subcommand prints a ``key = value`` report.  Input keys come first and
can be fed back through ``--config``; keys containing a dot (``out.*``,
``derived.*``) are results and are skipped on reload, so rerunning a report
reproduces it exactly.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import analytic, bell, montecarlo, optimize, oracle
from .apparatus import AnalyzerSettings, BeamSplitter, DetectorModel, InterferenceModel

EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_ORACLE = 4
ORACLE_TOL = 1e-12


class ValidationError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


MODEL = {
    "R": (float, None, "beam-splitter reflectance"),
    "rho": (float, None, "rho = R/(1-R)"),
    "symmetric": (bool, False, "50/50 beam splitter"),
    "v": (float, None, "fringe visibility"),
    "v_e": (float, None, "wave-packet visibility factor"),
    "dz": (float, None, "pinhole width"),
    "L": (float, None, "fringe spacing"),
    "phi": (float, 0.0, "fringe phase in degrees"),
}
ANGLES = {k: (float, None, f"analyzer angle {k} in degrees") for k in ("a1", "a2", "b1", "b2")}
OPTIMIZER = {
    "grid_step": (float, 15.0, "coarse grid step in degrees"),
    "starts": (int, 32, "multistart count"),
    "iterations": (int, 4000, "simplex iterations per start"),
    "tolerance": (float, 1e-10, "simplex convergence tolerance"),
    "seed": (int, 0, "random seed"),
}

COMMANDS = {
    "probability": {
        **MODEL,
        "eta": (float, 1.0, "detection efficiency"),
        "a": (float, None, "D1 analyzer angle in degrees"),
        "b": (float, None, "D2 analyzer angle in degrees"),
        "alpha": (float, 90.0, "D1' polarizer angle in degrees"),
        "beta": (float, 0.0, "D2' polarizer angle in degrees"),
        "p_infinity": (bool, False, "also report the polarizer-free selection"),
    },
    "ch": {
        **MODEL,
        **ANGLES,
        "eta": (float, None, "detection efficiency"),
        "corrected": (bool, False, "subtract same-crystal intruder counts"),
        "optimize": (bool, False, "choose the angles that minimize the efficiency threshold"),
        **OPTIMIZER,
    },
    "surface": {
        "v": (str, None, "visibility axis lo:hi:step or comma list"),
        "rho": (str, None, "rho axis lo:hi:step or comma list"),
        "R": (str, None, "reflectance axis lo:hi:step or comma list"),
        "out": (str, "surface.csv", "CSV output path"),
        "workers": (int, 1, "parallel worker processes"),
        **OPTIMIZER,
    },
    "hardy": {
        "v": (float, 1.0, "fringe visibility"),
        "R": (float, None, "fixed reflectance; omit to optimize over R"),
        "resolution": (float, 0.5, "angle grid resolution in degrees"),
        "tolerance": (float, 1e-10, "polish tolerance"),
    },
    "oracle-check": {
        "n": (int, 1000, "number of random configurations"),
        "seed": (int, 0, "random seed"),
    },
    "montecarlo": {
        **MODEL,
        **ANGLES,
        "eta": (float, 1.0, "detection efficiency"),
        "n": (int, 1_000_000, "number of emission trials"),
        "seed": (int, 0, "random seed"),
        "origin_sampling": (str, "uniform", "uniform or weighted emission-origin draw"),
        "ch": (bool, False, "estimate the CH statistic"),
    },
}
GROUPS = (("R", "rho", "symmetric"), ("v", "v_e", "dz", "L"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fourphoton", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, opts in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value file; command-line flags take precedence")
        p.add_argument("--report", help="also write the report to this file")
        for key, (typ, _, help_) in opts.items():
            if typ is bool:
                p.add_argument(_flag(key), dest=key, action="store_true", default=argparse.SUPPRESS, help=help_)
            else:
                p.add_argument(_flag(key), dest=key, type=typ, default=argparse.SUPPRESS, help=help_)
    return parser


def read_config(path: str | Path, opts: dict) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError("config", f"line {lineno} is not key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if "." in key or key == "command":
            continue
        if key not in opts:
            raise ValidationError(key, f"unknown key in {path}")
        typ = opts[key][0]
        if val == "None":
            continue
        try:
            values[key] = _bool(val) if typ is bool else typ(val)
        except ValueError as exc:
            raise ValidationError(key, str(exc)) from None
    return values


def resolve(command: str, cli: dict, file_values: dict) -> dict:
    """Defaults, then file, then flags; a flag from a group replaces the file's group."""
    opts = COMMANDS[command]
    merged = {k: d for k, (_, d, _) in opts.items()}
    for group in GROUPS:
        if any(k in cli and (cli[k] is not False) for k in group):
            file_values = {k: v for k, v in file_values.items() if k not in group}
    merged.update(file_values)
    merged.update(cli)
    return merged


# --- model construction -------------------------------------------------------------

def _splitter(cfg: dict) -> BeamSplitter:
    given = [k for k in ("R", "rho") if cfg.get(k) is not None] + (["symmetric"] if cfg.get("symmetric") else [])
    if len(given) != 1:
        raise ValidationError("R/rho/symmetric", f"give exactly one, got {given or 'none'}")
    try:
        if given[0] == "R":
            if not 0.0 < cfg["R"] < 1.0:
                raise ValueError(f"R must lie in (0, 1), got {cfg['R']!r}")
            return BeamSplitter.from_reflectance(cfg["R"])
        if given[0] == "rho":
            if not cfg["rho"] > 0.0:
                raise ValueError(f"rho must be positive, got {cfg['rho']!r}")
            return BeamSplitter.from_rho(cfg["rho"])
        return BeamSplitter.symmetric()
    except ValueError as exc:
        raise ValidationError(given[0], str(exc)) from None


def _interference(cfg: dict) -> InterferenceModel:
    phi = math.radians(cfg.get("phi") or 0.0)
    parts = [cfg.get(k) for k in ("v_e", "dz", "L")]
    if cfg.get("v") is not None:
        if any(p is not None for p in parts):
            raise ValidationError("v", "give either v or (v_e, dz, L), not both")
        if not 0.0 <= cfg["v"] <= 1.0:
            raise ValidationError("v", f"must lie in [0, 1], got {cfg['v']!r}")
        return InterferenceModel.with_visibility(cfg["v"], phi)
    if any(p is None for p in parts):
        raise ValidationError("v", "give v or all of v_e, dz, L")
    try:
        return InterferenceModel(phi=phi, v_e=parts[0], dz=parts[1], L=parts[2])
    except ValueError as exc:
        raise ValidationError("v_e/dz/L", str(exc)) from None


def _eta(cfg: dict) -> float:
    eta = cfg.get("eta")
    if eta is None:
        raise ValidationError("eta", "required")
    if not 0.0 <= eta <= 1.0:
        raise ValidationError("eta", f"must lie in [0, 1], got {eta!r}")
    return eta


def _settings(cfg: dict) -> AnalyzerSettings:
    missing = [k for k in ANGLES if cfg.get(k) is None]
    if missing:
        raise ValidationError(",".join(missing), "analyzer angles required")
    return AnalyzerSettings.from_degrees(cfg["a1"], cfg["a2"], cfg["b1"], cfg["b2"])


def _optimizer_config(cfg: dict) -> optimize.OptimizerConfig:
    try:
        return optimize.OptimizerConfig(
            coarse_grid_step=cfg["grid_step"],
            polish_iterations=cfg["iterations"],
            polish_tolerance=cfg["tolerance"],
            multistart_count=cfg["starts"],
            seed=cfg["seed"],
        )
    except ValueError as exc:
        raise ValidationError("optimizer", str(exc)) from None


def parse_axis(text: str, name: str) -> list[float]:
    try:
        if ":" in text:
            lo, hi, step = (float(s) for s in text.split(":"))
            if not step > 0.0 or hi < lo:
                raise ValueError("need lo <= hi and step > 0")
            n = int(math.floor((hi - lo) / step + 1e-9)) + 1
            return [float(f"{lo + k * step:.12g}") for k in range(n)]
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ValidationError(name, f"bad axis {text!r}: {exc}") from None


def _splitter_record(bs: BeamSplitter) -> dict:
    return {"derived.R": bs.R, "derived.rho": bs.rho}


# --- commands -------------------------------------------------------------------

def cmd_probability(cfg: dict):
    bs, im, eta = _splitter(cfg), _interference(cfg), _eta(cfg)
    for k in ("a", "b"):
        if cfg.get(k) is None:
            raise ValidationError(k, "required")
    a, b = math.radians(cfg["a"]), math.radians(cfg["b"])
    alpha, beta = math.radians(cfg["alpha"]), math.radians(cfg["beta"])
    out = dict(_splitter_record(bs))
    out["derived.v"] = im.v
    out["out.coincidence[four-fold]"] = float(analytic.coincidence_probability(a, b, alpha, beta, bs, im, eta))
    gating = (
        math.isclose(math.cos(alpha), 0.0, abs_tol=1e-12) and math.isclose(math.sin(beta), 0.0, abs_tol=1e-12)
    )
    if gating:
        out["out.bell_pair[gated]"] = float(analytic.bell_pair_probability(a, b, bs, im, eta))
        out["out.single_D1[gated]"] = float(analytic.single_probability_D1(a, bs, eta))
        out["out.single_D2[gated]"] = float(analytic.single_probability_D2(b, bs, eta))
        out["out.intruder_D1[crystal-1 double]"] = float(analytic.intruder_probability_D1(a, bs, im, eta))
        out["out.intruder_D2[crystal-2 double]"] = float(analytic.intruder_probability_D2(b, bs, im, eta))
    if cfg["p_infinity"]:
        try:
            out["out.p_infinity[polarizer-free]"] = float(
                analytic.unpolarized_selection_probability(a, b, bs, im, eta)
            )
        except ValueError as exc:
            raise ValidationError("p_infinity", str(exc)) from None
    return out, 0


def cmd_ch(cfg: dict):
    bs, im, eta = _splitter(cfg), _interference(cfg), _eta(cfg)
    out = dict(_splitter_record(bs))
    out["derived.v"] = im.v
    if cfg["optimize"]:
        res = optimize.optimize_angles(bs, im.v, _optimizer_config(cfg), im.phi)
        if res.eta_min is None:
            out["out.feasible"] = False
            return out, EXIT_INFEASIBLE
        deg = [math.degrees(x) for x in res.angles]
        for k, d in zip(ANGLES, deg):
            out[f"out.optimal_{k}"] = d
        settings = AnalyzerSettings(*res.angles)
    else:
        settings = _settings(cfg)
    report = bell.corrected_ch(settings, bs, im, eta) if cfg["corrected"] else bell.ch_statistic(settings, bs, im, eta)
    for k, v in report.terms.items():
        out[f"out.term{k}"] = v
    out["out.B_CH"] = report.B_CH
    out["out.violated"] = report.violated
    out["out.eta_min"] = report.eta_min
    if cfg["corrected"]:
        for k, v in report.intruders.items():
            out[f"out.intruder.{k}"] = v
        out["out.corrected_B"] = report.corrected_B
        out["out.corrected_violated"] = report.corrected_violated
        out["out.note"] = report.note
    code = EXIT_INFEASIBLE if report.eta_min is None else 0
    return out, code


def cmd_surface(cfg: dict):
    if cfg.get("v") is None:
        raise ValidationError("v", "visibility axis required")
    if (cfg.get("rho") is None) == (cfg.get("R") is None):
        raise ValidationError("R/rho", "give exactly one axis")
    v_axis = parse_axis(cfg["v"], "v")
    if cfg.get("rho") is not None:
        rho_axis = parse_axis(cfg["rho"], "rho")
    else:
        R_axis = parse_axis(cfg["R"], "R")
        if any(not 0.0 < R <= 0.5 for R in R_axis):
            raise ValidationError("R", "values must lie in (0, 0.5]")
        rho_axis = [R / (1.0 - R) for R in R_axis]
    try:
        surf = optimize.build_surface(v_axis, rho_axis, _optimizer_config(cfg), workers=cfg["workers"])
    except ValueError as exc:
        raise ValidationError("axes", str(exc)) from None
    surf.write_csv(cfg["out"])
    undefined = int(np.isnan(surf.eta_min_grid).sum())
    out = {
        "out.csv": cfg["out"],
        "out.rows": surf.eta_min_grid.size,
        "out.undefined_cells": undefined,
        "out.nondecreasing_in_rho": surf.diagnostics["nondecreasing_in_rho"],
        "out.eta_min_lowest": float(np.nanmin(surf.eta_min_grid)) if undefined < surf.eta_min_grid.size else None,
    }
    return out, EXIT_INFEASIBLE if undefined else 0


def cmd_hardy(cfg: dict):
    v = cfg["v"]
    if not 0.0 <= v <= 1.0:
        raise ValidationError("v", f"must lie in [0, 1], got {v!r}")
    out = {}
    if cfg.get("R") is not None:
        if not 0.0 < cfg["R"] < 1.0:
            raise ValidationError("R", "must lie in (0, 1)")
        rep = bell.hardy_scan(BeamSplitter.from_reflectance(cfg["R"]), v, cfg["resolution"])
        out["out.hardy_probability"] = rep.hardy_probability
        out["out.attainable"] = rep.attainable
        if rep.optimal_angles is not None:
            for k, a in zip(ANGLES, rep.optimal_angles):
                out[f"out.{k}"] = math.degrees(a) % 180.0
            out["out.max_residual"] = max(rep.constraint_residuals)
        if rep.note:
            out["out.note"] = rep.note
        return out, 0 if rep.attainable else EXIT_INFEASIBLE
    if v != 1.0:
        raise ValidationError("v", "optimizing over R needs v = 1")
    cfg_opt = optimize.OptimizerConfig(polish_tolerance=cfg["tolerance"])
    res = optimize.hardy_optimum(v, cfg_opt, cfg["resolution"])
    out["out.best_R"] = res.best_R
    out["out.best_rho"] = res.best_R / (1.0 - res.best_R)
    out["out.hardy_probability"] = res.hardy_probability
    for k, a in zip(ANGLES, res.angles):
        out[f"out.{k}"] = math.degrees(a) % 180.0
    return out, 0


def cmd_oracle_check(cfg: dict):
    n = cfg["n"]
    if n < 1:
        raise ValidationError("n", "must be positive")
    rng = np.random.default_rng(cfg["seed"])
    im = InterferenceModel()
    det = DetectorModel(1.0)
    state = oracle.build_input_state(oracle.Kind.BOTH_CRYSTALS)
    worst = 0.0
    failures = 0
    for _ in range(n):
        bs, s = oracle.random_configuration(rng)
        for pair in oracle.all_pairs():
            q = oracle.fourfold_probability(state, bs, im, s, det, pair)
            c = analytic.settings_coincidence(s, pair, bs, im, 1.0)
            d = abs(q - c)
            worst = max(worst, d)
            failures += d > ORACLE_TOL
    out = {"out.configurations": n, "out.comparisons": 4 * n, "out.max_abs_diff": worst, "out.failures": failures}
    return out, EXIT_ORACLE if failures else 0


def cmd_montecarlo(cfg: dict):
    bs, im, eta = _splitter(cfg), _interference(cfg), _eta(cfg)
    settings = _settings(cfg)
    out = dict(_splitter_record(bs))
    out["derived.v"] = im.v
    args = (settings, bs, im, eta, cfg["n"], cfg["seed"], cfg["origin_sampling"])
    try:
        if cfg["ch"]:
            ch = montecarlo.estimate_ch(*args)
            run = ch.run
        else:
            ch = None
            run = montecarlo.run(*args)
    except ValueError as exc:
        raise ValidationError("montecarlo", str(exc)) from None
    targets = montecarlo.analytic_targets(settings, bs, im, eta)
    out["out.gated_events"] = run.gated_both_crystal_events
    for k, e in run.estimates.items():
        out[f"out.{k}.estimate"] = e.value
        out[f"out.{k}.stderr"] = e.stderr
        out[f"out.{k}.analytic"] = targets[k]
    if ch is not None:
        out["out.B_CH"] = ch.B_CH
        out["out.B_CH.stderr"] = ch.stderr
        out["out.B_CH.significance"] = ch.significance
        out["out.violated_3sigma"] = ch.violated
        out["out.corrected_B"] = ch.corrected_B
        out["out.corrected_B.stderr"] = ch.corrected_stderr
    return out, 0


HANDLERS = {
    "probability": cmd_probability,
    "ch": cmd_ch,
    "surface": cmd_surface,
    "hardy": cmd_hardy,
    "oracle-check": cmd_oracle_check,
    "montecarlo": cmd_montecarlo,
}


def _format(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def format_report(command: str, cfg: dict, results: dict) -> str:
    lines = [f"command = {command}"]
    lines += [f"{k} = {_format(cfg[k])}" for k in COMMANDS[command]]
    lines += [f"{k} = {_format(v)}" for k, v in results.items()]
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    report_path = args.pop("report", None)
    try:
        file_values = read_config(config_path, COMMANDS[command]) if config_path else {}
        cfg = resolve(command, args, file_values)
        results, code = HANDLERS[command](cfg)
    except ValidationError as exc:
        print(f"fourphoton {command}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"fourphoton {command}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    text = format_report(command, cfg, results)
    sys.stdout.write(text)
    if report_path:
        Path(report_path).write_text(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
