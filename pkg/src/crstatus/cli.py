"""Command-line interface: estimate, ci, and simulate subcommands.

Every output file embeds the run manifest (inputs, model, options, tool
version), and outputs are byte-identical across reruns of the same manifest.
Numbers are serialized with 12 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .core import GroupingScheme, TallyTable
from .estimators import (
    NonConvergenceError,
    SolverSettings,
    fit_mle,
    naive_estimate_all,
    simple_estimator,
)
from .inference import (
    LR_CRITICAL_PROVENANCE,
    ModelSpec,
    bootstrap_deviations,
    ci_likelihood_ratio,
    ci_normal,
    default_lr_critical_value,
)
from .io import InputFormatError, read_grouping_scheme, read_observations_csv
from .simulation import (
    GammaLaw,
    ObservationModel,
    SimulationConfig,
    coverage_sweep,
    default_grid_suite,
)

ESTIMATORS = ("mle", "naive", "simple")
CI_METHODS = ("normal", "bootstrap", "lr")


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _write_csv(path, manifest: dict, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not serializable: {type(obj)}")


def _load_inputs(args) -> tuple:
    data = read_observations_csv(args.input)
    scheme = None
    if args.model == "grouped":
        if not args.scheme:
            raise ValueError("grouped model requires --scheme")
        scheme = read_grouping_scheme(args.scheme)
    K = args.causes if args.causes else max(1, int(data.statuses.max()))
    spec = ModelSpec(args.model, scheme)
    tally = spec.tally(data, K)
    if args.model == "smooth" and len(tally.support) < len(data):
        print(
            "warning: tied observation times under the smooth model; "
            "consider --model discrete or grouped",
            file=sys.stderr,
        )
    return data, spec, tally, K


def _manifest(args, command: str, K: int, **extra) -> dict:
    manifest = {
        "command": command,
        "tool": "crstatus",
        "version": __version__,
        "model": args.model,
        "K": K,
        "input": args.input,
        "scheme": getattr(args, "scheme", None),
    }
    manifest.update(extra)
    return manifest


def cmd_estimate(args) -> int:
    data, spec, tally, K = _load_inputs(args)
    kinds = args.estimator or ["mle"]
    manifest = _manifest(args, "estimate", K, estimators=kinds)
    rows = []
    diagnostics = {}
    exit_code = 0
    for kind in kinds:
        if kind == "mle":
            try:
                fit = fit_mle(tally, model=args.model)
                estimate = fit.estimate
                diagnostics["mle"] = {
                    "iterations": fit.iterations,
                    "kkt_residual": fit.kkt_residual,
                    "log_likelihood": fit.log_likelihood,
                    "converged": True,
                }
            except NonConvergenceError as exc:
                estimate = exc.estimate
                diagnostics["mle"] = {
                    "iterations": None,
                    "kkt_residual": exc.kkt_residual,
                    "log_likelihood": exc.log_likelihood,
                    "converged": False,
                    "error": str(exc),
                }
                exit_code = 3
        elif kind == "naive":
            estimate = naive_estimate_all(tally, model=args.model)
        elif kind == "simple":
            estimate = simple_estimator(tally, model=args.model)
        else:
            raise ValueError(f"unknown estimator {kind!r}")
        for i, point in enumerate(tally.support):
            for k in range(1, K + 1):
                rows.append([float(point), k, float(estimate.values[i, k - 1]), kind, args.model])
    _write_csv(args.output + ".csv", manifest, ["point", "cause", "estimate", "kind", "model"], rows)
    _write_json(args.output + ".json", {"manifest": manifest, "diagnostics": diagnostics})
    return exit_code


def _requested_points(args, tally: TallyTable):
    if not args.points:
        return [float(p) for p in tally.support], []
    points = [float(p) for p in args.points.split(",")]
    in_support = set(float(p) for p in tally.support)
    good = [p for p in points if p in in_support]
    bad = [p for p in points if p not in in_support]
    return good, bad


def cmd_ci(args) -> int:
    data, spec, tally, K = _load_inputs(args)
    methods = args.method or ["normal"]
    estimators = args.estimator or ["mle"]
    warnings = []
    if args.model == "smooth" and any(m in ("normal", "bootstrap") for m in methods):
        warnings.append("normal/bootstrap intervals assume a discrete or grouped observation law")
    if args.model != "smooth" and "lr" in methods:
        warnings.append("likelihood ratio intervals are calibrated for the smooth model")
    critical = None
    critical_source = None
    if "lr" in methods:
        critical = args.critical_value if args.critical_value else default_lr_critical_value(args.level)
        critical_source = "user-supplied" if args.critical_value else LR_CRITICAL_PROVENANCE
    manifest = _manifest(
        args,
        "ci",
        K,
        methods=methods,
        estimators=estimators,
        level=args.level,
        bootstrap_resamples=args.resamples if "bootstrap" in methods else None,
        seed=args.seed if "bootstrap" in methods else None,
        critical_value=critical,
        critical_value_source=critical_source,
        warnings=warnings,
    )
    points, bad_points = _requested_points(args, tally)
    causes = list(range(1, K + 1))
    rows = []
    header = ["point", "cause", "method", "estimator", "level", "lower", "upper", "note"]
    for method in methods:
        for est_kind in estimators:
            if method == "lr" and est_kind != "naive":
                if "naive" in estimators:
                    continue  # avoid duplicate lr rows; lr is naive-based
                est_kind = "naive"
            for p in bad_points:
                for k in causes:
                    rows.append([p, k, method, est_kind, args.level, "", "", "error: point not in observed support"])
            if method == "normal":
                estimate = (
                    fit_mle(tally, model=args.model).estimate
                    if est_kind == "mle"
                    else naive_estimate_all(tally, model=args.model)
                )
                for p in points:
                    for k in causes:
                        ci = ci_normal(tally, estimate, p, k, args.level)
                        rows.append([p, k, "normal", est_kind, args.level, ci.lower, ci.upper, ""])
            elif method == "bootstrap":
                theta, devs = bootstrap_deviations(
                    data, spec, est_kind, K, points, causes, args.resamples, args.seed
                )
                import math

                q_index = min(args.resamples, math.ceil(args.resamples * args.level)) - 1
                q = np.sort(np.abs(devs), axis=0)[q_index]
                for i, p in enumerate(points):
                    for j, k in enumerate(causes):
                        rows.append(
                            [p, k, "bootstrap", est_kind, args.level, theta[i, j] - q[i, j], theta[i, j] + q[i, j], ""]
                        )
            elif method == "lr":
                for p in points:
                    for k in causes:
                        ci = ci_likelihood_ratio(tally, k, p, args.level, critical)
                        rows.append([p, k, "lr", "naive", args.level, ci.lower, ci.upper, ""])
            else:
                raise ValueError(f"unknown method {method!r}")
    _write_csv(args.output + ".csv", manifest, header, rows)
    _write_json(args.output + ".json", {"manifest": manifest})
    return 0


def _observation_from_config(entry: dict) -> ObservationModel:
    model = entry.get("model", "discrete")
    label = entry.get("label", "")
    if model == "discrete":
        return ObservationModel("discrete", grid=np.asarray(entry["grid"], dtype=float), label=label)
    time_range = tuple(entry["time_range"])
    if model == "smooth":
        return ObservationModel("smooth", time_range=time_range, label=label)
    if "scheme_file" in entry:
        scheme = read_grouping_scheme(entry["scheme_file"])
    else:
        lower, upper, width = entry["cells"]
        scheme = GroupingScheme.regular_cells(lower, upper, width)
    return ObservationModel("grouped", time_range=time_range, scheme=scheme, label=label)


def load_simulation_config(path) -> tuple[SimulationConfig, list[ObservationModel], dict]:
    with open(path) as fh:
        raw = json.load(fh)
    laws = tuple(GammaLaw(law["shape"], law["scale"]) for law in raw["event_time_laws"])
    grids_raw = raw.get("grids", "default")
    if grids_raw == "default":
        observations = [
            ObservationModel("discrete", grid=grid, label=label) for label, grid in default_grid_suite().items()
        ]
    else:
        observations = [_observation_from_config(entry) for entry in grids_raw]
    config = SimulationConfig(
        cause_probabilities=tuple(raw["cause_probabilities"]),
        event_time_laws=laws,
        observation=observations[0],
        n=int(raw["n"]),
        replications=int(raw["replications"]),
        seed=int(raw["seed"]),
        evaluation_points=tuple(raw["evaluation_points"]),
    )
    options = {
        "methods": raw.get("methods", ["normal", "bootstrap"]),
        "estimators": raw.get("estimators", ["mle", "naive"]),
        "level": float(raw.get("level", 0.95)),
        "B": int(raw.get("bootstrap_resamples", 200)),
    }
    return config, observations, options


def cmd_simulate(args) -> int:
    config, observations, options = load_simulation_config(args.config)
    threads = args.threads or int(os.environ.get("CRSTATUS_THREADS", "1"))
    report = coverage_sweep(
        config,
        observations,
        methods=options["methods"],
        estimators=options["estimators"],
        level=options["level"],
        B=options["B"],
        threads=threads,
    )
    manifest = {
        "command": "simulate",
        "tool": "crstatus",
        "version": __version__,
        "config": args.config,
        "threads_requested": threads,
        "grids": [obs.label or obs.model for obs in observations],
        **{k: v for k, v in options.items()},
        "n": config.n,
        "replications": config.replications,
        "seed": config.seed,
    }
    report.write_csv(args.output + ".csv", manifest)
    report.write_json(args.output + ".json", manifest)
    if args.emit_plot_data:
        rows = [
            [r.grid_label, r.method, r.estimator, r.cause, r.t0, r.coverage, r.avg_width]
            for r in report.rows
        ]
        _write_csv(
            args.output + "_plot.csv",
            manifest,
            ["grid_label", "method", "estimator", "cause", "t0", "coverage", "avg_width"],
            rows,
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crstatus",
        description="Nonparametric cumulative incidence estimation from competing-risks current status data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="observation CSV with header time,status")
    common.add_argument("--model", required=True, choices=["smooth", "discrete", "grouped"])
    common.add_argument("--scheme", help="grouping scheme file (grouped model)")
    common.add_argument("-K", "--causes", type=int, help="number of competing risks (default: max status)")
    common.add_argument("--output", required=True, help="output path prefix")

    p_est = sub.add_parser("estimate", parents=[common], help="fit estimators and write estimates")
    p_est.add_argument("--estimator", action="append", choices=ESTIMATORS, help="repeatable; default mle")
    p_est.set_defaults(func=cmd_estimate)

    p_ci = sub.add_parser("ci", parents=[common], help="pointwise confidence intervals")
    p_ci.add_argument("--method", action="append", choices=CI_METHODS, help="repeatable; default normal")
    p_ci.add_argument("--estimator", action="append", choices=["mle", "naive"], help="repeatable; default mle")
    p_ci.add_argument("--level", type=float, default=0.95)
    p_ci.add_argument("-B", "--resamples", type=int, default=750, help="bootstrap resamples")
    p_ci.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    p_ci.add_argument("--critical-value", type=float, help="likelihood ratio critical value")
    p_ci.add_argument("--points", help="comma-separated evaluation points (default: all support points)")
    p_ci.set_defaults(func=cmd_ci)

    p_sim = sub.add_parser("simulate", help="Monte Carlo coverage experiment from a JSON config")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--output", required=True)
    p_sim.add_argument("--emit-plot-data", action="store_true")
    p_sim.add_argument("--threads", type=int, default=0, help="replication workers (default: CRSTATUS_THREADS or 1)")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
