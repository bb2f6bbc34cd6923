"""Command-line entry point: frontlab <command> --config <path> [--out <dir>] [--seed <n>]."""
from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import export
from .errors import (ConfigError, DependencyError, DomainError, FrontlabError, HypothesisError,
                     NumericalError)
from .evans import (circle_contour, coefficient_fields, default_rectangle, evans_derivative_at_zero,
                    evans_report, melnikov_gamma, point_gap, rectangle_contour)
from .model import model_from_dict, validate_hypotheses
from .profile import UNSTABLE, compute_front, trace_manifold
from .resolvent import stationary_grid, verify_bounds
from .spectrum import asymptotic_data, spectral_gap
from .timestepper import (measure_decay_rate, measure_front_speed, simulate, step_initial_state,
                          uniform_grid)

COMMANDS = ("front", "spectrum", "gap", "evans", "resolvent", "simulate", "all", "validate")
EXIT_OK, EXIT_USAGE, EXIT_HYPOTHESIS, EXIT_NUMERICAL = 0, 1, 2, 3

DEFAULTS = {
    "profile": {"dx": 0.005, "L": None, "epsilon": 1e-8},
    "spectrum": {"xi_max": 50.0, "xi_step": 0.025, "tol": 1e-9},
    "evans": {"disk_radius": 0.05, "n0_disk": 64, "n0_rectangle": 256, "zero_floor": 1e-10},
    "resolvent": {"n": 1000, "L": None, "trials": 20},
    "simulate": {"points": None, "L": 60.0, "t_end": 100.0, "every": 0.5, "amplitude": 1e-3,
                 "horizon": 40.0, "decay_points": None},
    "manifold": {"gammas": []},
}
TOP_KEYS = {"model", "command", "seed", "out"} | set(DEFAULTS)
# entries that may be null (meaning "derive from the front / model")
NULLABLE = {("profile", "L"), ("resolvent", "L"), ("simulate", "points"), ("simulate", "decay_points")}
INTEGER = {("evans", "n0_disk"), ("evans", "n0_rectangle"), ("resolvent", "n"), ("resolvent", "trials"),
           ("simulate", "points"), ("simulate", "decay_points")}
SUMMARY_KEYS = ("gamma_star", "c_star", "chi0", "winding_origin", "winding_stability_region",
                "melnikov_gamma", "hypothesis_report")


def normalize_config(doc: dict) -> dict:
    """Fill defaults and check keys and values; a summary document is accepted as well."""
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    if "config" in doc and isinstance(doc["config"], dict):
        doc = doc["config"]          # re-ingesting a summary
    unknown = sorted(set(doc) - TOP_KEYS)
    if unknown:
        raise ConfigError(f"config: unknown key {unknown[0]!r}")
    if "model" not in doc:
        raise ConfigError("config: missing key 'model'")
    model = model_from_dict(doc["model"])
    cfg = {"model": model.to_dict()}
    for section, defaults in DEFAULTS.items():
        given = doc.get(section, {}) or {}
        if not isinstance(given, dict):
            raise ConfigError(f"config: {section!r} must be an object")
        bad = sorted(set(given) - set(defaults))
        if bad:
            raise ConfigError(f"config: unknown key {section + '.' + bad[0]!r}")
        merged = copy.deepcopy(defaults)
        merged.update(given)
        for key, val in merged.items():
            name = f"{section}.{key}"
            if key == "gammas":
                if not isinstance(val, list) or not all(isinstance(v, (int, float)) for v in val):
                    raise ConfigError(f"config: {name!r} must be a list of numbers")
                merged[key] = [float(v) for v in val]
                continue
            if val is None:
                if (section, key) not in NULLABLE:
                    raise ConfigError(f"config: {name!r} may not be null")
                continue
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"config: {name!r} must be a number")
            if not val > 0:
                raise ConfigError(f"config: {name!r} must be positive, got {val}")
            merged[key] = int(val) if (section, key) in INTEGER else float(val)
        cfg[section] = merged
    if "command" in doc:
        if doc["command"] not in COMMANDS:
            raise ConfigError(f"config: unknown command {doc['command']!r}")
        cfg["command"] = doc["command"]
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("config: 'seed' must be a non-negative integer")
    cfg["seed"] = seed
    if "out" in doc:
        cfg["out"] = str(doc["out"])
    return cfg


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return normalize_config(doc)


def emit_plot_data(results: dict, kind: str, outdir) -> list[Path]:
    """Write plotting data of one kind from previously computed results."""
    outdir = Path(outdir)
    need = {"profile": "front", "dispersion": "spectral_data", "evans-contour": "evans",
            "simulation": "trajectory", "manifold": "manifold"}
    if kind not in need:
        raise DomainError(f"unknown plot kind {kind!r}")
    if results.get(need[kind]) is None:
        raise DependencyError(f"plot kind {kind!r} needs {need[kind]!r}, which was not computed")
    item = results[need[kind]]
    if kind == "profile":
        return [export.profile_csv(item, outdir / "profile.csv")]
    if kind == "dispersion":
        cfg = results["config"]["spectrum"]
        n = int(round(2 * cfg["xi_max"] / cfg["xi_step"])) + 1
        xi = np.linspace(-cfg["xi_max"], cfg["xi_max"], n)
        return export.dispersion_csvs(item, outdir, xi, cfg["tol"])
    if kind == "evans-contour":
        return [export.evans_csv(rep, outdir / f"evans_{name}.csv") for name, rep in item.items()]
    if kind == "simulation":
        return [export.trajectory_csv(item, outdir / "simulation.csv")]
    return [export.manifold_csv(item, outdir / "manifold.csv")]


def manifold_traces(model, gammas, epsilon: float = 1e-8):
    """Unstable-manifold traces out of 0 in the (V, W) plane for each gamma."""
    return [trace_manifold(model, g, UNSTABLE, epsilon) for g in gammas]


def run(cfg: dict, command: str, out: Optional[Path] = None) -> tuple[int, dict]:
    """Execute one command; returns (exit status, summary)."""
    out = Path(out if out is not None else cfg.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    model = model_from_dict(cfg["model"])
    echo = {k: v for k, v in cfg.items() if k not in ("out", "command")}
    summary = {k: None for k in SUMMARY_KEYS}
    summary.update(command=command, config=echo, seed=cfg["seed"])
    results = {"config": cfg}

    report = validate_hypotheses(model)
    summary["hypothesis_report"] = report.to_dict()
    if command == "validate" or not report.passed:
        status = EXIT_OK if report.passed else EXIT_HYPOTHESIS
        export.write_json(summary, out / "summary.json")
        return status, summary

    pc = cfg["profile"]
    front = compute_front(model, L=pc["L"], dx=pc["dx"], epsilon=pc["epsilon"])
    results["front"] = front
    summary["gamma_star"] = front.gamma_star
    summary["c_star"] = front.c_star
    data = asymptotic_data(model, front)
    gap = spectral_gap(data)
    summary["chi0"] = gap.chi0
    results["spectral_data"] = data
    want = {command} if command != "all" else set(COMMANDS) - {"all", "validate"}

    if "front" in want:
        emit_plot_data(results, "profile", out)
        if cfg["manifold"]["gammas"]:
            results["manifold"] = manifold_traces(model, cfg["manifold"]["gammas"], pc["epsilon"])
            emit_plot_data(results, "manifold", out)
    if "spectrum" in want:
        emit_plot_data(results, "dispersion", out)
    if want & {"spectrum", "gap"}:
        export.write_json(gap.to_dict(), out / "gap.json")

    pg = None
    if "evans" in want:
        ec = cfg["evans"]
        fields = coefficient_fields(model, front)
        gamma = melnikov_gamma(fields, front)
        left, R, M = default_rectangle(fields)
        disk = evans_report(fields, front, circle_contour(0.0, ec["disk_radius"], ec["n0_disk"]), gamma,
                            ec["zero_floor"])
        rect = evans_report(fields, front, rectangle_contour(left, R, M, ec["n0_rectangle"]), gamma,
                            ec["zero_floor"])
        results["evans"] = {"disk": disk, "rectangle": rect}
        emit_plot_data(results, "evans-contour", out)
        for name, rep in results["evans"].items():
            export.write_json(rep.to_dict(), out / f"evans_{name}.json")
        pg = point_gap(fields, ec["disk_radius"])
        summary["winding_origin"] = disk.winding
        summary["winding_stability_region"] = rect.winding - disk.winding
        summary["melnikov_gamma"] = gamma
        summary["evans"] = {"rectangle": [left, R, M], "d_evans_at_zero": evans_derivative_at_zero(fields),
                            "point_gap": pg.point_gap, "chi": pg.chi}

    if "resolvent" in want:
        rc = cfg["resolvent"]
        try:
            grid = stationary_grid(model, front, rc["n"], rc["L"])
        except DomainError as exc:
            if command != "all":
                raise
            summary["resolvent"] = {"skipped": str(exc)}
        else:
            rep = verify_bounds(grid, trials=rc["trials"], seed=cfg["seed"])
            export.write_json(rep.to_list(), out / "resolvent.json")
            summary["resolvent"] = {"M": rep.M, "theta0": rep.theta0, "trials": rep.trials,
                                    "vuprime_max": rep.vuprime_max, "uell2_max": rep.uell2_max,
                                    "decay_slope": rep.decay_slope, "halving": list(rep.halving)}

    if "simulate" in want:
        sc = cfg["simulate"]
        points = sc["points"] or (4096 if model.tau > 0 else 1024)
        x = uniform_grid(sc["L"], points)
        traj = simulate(model, step_initial_state(x, model.alpha), sc["t_end"], every=sc["every"])
        results["trajectory"] = traj
        emit_plot_data(results, "simulation", out)
        speed = measure_front_speed(traj, model.alpha)
        dpoints = sc["decay_points"] or (2048 if model.tau > 0 else 512)
        decay = measure_decay_rate(model, front, gap.chi0, None if pg is None else pg.point_gap,
                                   amplitude=sc["amplitude"], horizon=sc["horizon"], points=dpoints)
        sim = {"measured_speed": speed, "c_star": front.c_star,
               "speed_relative_error": abs(speed - front.c_star) / max(abs(front.c_star), 1e-300),
               "decay_rate": decay.rate, "chi0": decay.chi0, "chi": decay.chi,
               "decay_threshold": decay.threshold, "decay_passed": decay.passed, "note": decay.note}
        export.write_json(sim, out / "simulation.json")
        summary["simulation"] = sim

    export.write_json(summary, out / "summary.json")
    return EXIT_OK, summary


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="frontlab", description="Traveling fronts of damped bistable wave equations.")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", help="JSON configuration document")
    p.add_argument("--out", help="output directory (default: config 'out' or the current directory)")
    p.add_argument("--seed", type=int, help="random seed for the resolvent trials")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:          # argparse usage errors and --help
        return int(exc.code or 0)
    if not args.command and not args.config:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    if not args.config:
        parser.print_usage(sys.stderr)
        print("frontlab: error: --config is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            cfg["seed"] = args.seed
        command = args.command or cfg.get("command")
        if not command:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        status, summary = run(cfg, command, args.out)
    except (ConfigError, DomainError, DependencyError) as exc:
        print(f"frontlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypothesisError as exc:
        print(f"frontlab: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NumericalError as exc:
        print(f"frontlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FrontlabError as exc:
        print(f"frontlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if status == EXIT_HYPOTHESIS:
        failed = [c["name"] for c in summary["hypothesis_report"]["clauses"] if not c["passed"]]
        print(f"frontlab: hypothesis check failed: {', '.join(failed)}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
