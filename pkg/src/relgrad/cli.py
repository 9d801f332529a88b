"""Experiment harness and command-line surface.

Subcommands:

* ``run``            delta/seed sweep of all methods on a logistic problem,
                     emitting per-run and aggregated CSVs
* ``pep``            worst-case rate sweep (original and shortened) via the
                     performance-estimation SDPs
* ``compress-demo``  loss versus cumulative bit budget for full-precision
                     and mantissa-compressed gradient descent
* ``estimate-l``     smoothness estimation with a fresh-run validation

All knobs the underlying experiments leave open (split ratio, probe length,
seeds, grids) live in one JSON config; flags override it.  Exit codes:
0 success, 2 configuration or data error, 3 partial solver failures.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import pep as pep_mod
from .oracle import InexactnessModel, OracleKind, RoundingMode, paper_compression_delta
from .problems import (
    Dataset,
    DatasetFormatError,
    LogisticProblem,
    accuracy,
    estimate_smoothness,
    load_dataset,
    scale_features_unit,
    synthetic_dataset,
    train_test_split,
    vector_to_params,
)
from .schedules import (
    ScheduleKind,
    StepSchedule,
    constant_schedule,
    dynamic_schedule,
    fgm_step_schedule,
    shorten,
    silver_schedule,
)
from .solvers import (
    Trajectory,
    best_gradient_iterate,
    reference_minimize,
    run_inexact_fgm,
    run_inexact_gd,
)

__all__ = [
    "DEFAULT_CONFIG",
    "ConfigError",
    "ExperimentReport",
    "load_config",
    "cmd_run",
    "cmd_pep",
    "cmd_compress_demo",
    "cmd_estimate_l",
    "main",
]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3

DEFAULT_CONFIG = {
    "problem": {
        "kind": "synthetic",
        "seed": 7,
        "n_samples": 200,
        "n_features": 10,
        "separation": 2.0,
        "condition": 1e3,
        "path": None,
    },
    "scale_features": False,
    "split_ratio": 0.8,
    "split_seed": 0,
    "methods": ["constant", "dynamic", "silver", "fgm"],
    "variants": ["original", "shortened"],
    "constant_step": 1.5,
    "inexactness": {
        "kind": "adversarial",
        "delta_grid": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
        "n_bits": [3, 2, 1, 0],
        "rounding_mode": "truncate_toward_zero",
    },
    "iterations": 100,
    "seeds": [0, 1, 2, 3, 4, 5],
    "init_radius": 1.0,
    "init_seed_offset": 1000,
    "smoothness_probe_steps": 60,
    "smoothness_probe_length": 0.1,
    "smoothness_safety_margin": 1.05,
    "smoothness_override": None,
    "verify_oracle": False,
    "reference_budget_factor": 10,
    "momentum_index_offset": 0,
    "pep": {
        "n_iterations": 5,
        "delta_grid": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
        "desk_scale_cap": 25,
        "criterion": "min_iterates",
        "tolerance": 1e-8,
    },
    "compress_demo": {
        "n_bits": [2, 1, 0],
        "budget_bits": 400_000,
        "step": 1.5,
    },
}

RUN_CSV_COLUMNS = [
    "method",
    "shortened",
    "delta",
    "seed",
    "best_grad_norm_sq",
    "best_train_acc",
    "test_acc_at_best_train",
    "total_bits",
]

REPORT_CSV_COLUMNS = [
    "method",
    "shortened",
    "delta",
    "mean_best_grad_norm_sq",
    "mean_best_train_acc",
    "mean_test_acc",
    "mean_total_bits",
]

PEP_CSV_COLUMNS = ["method", "delta", "N", "shortened", "tau", "status"]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentReport:
    """Per-(method, variant, delta) arithmetic means over seeds."""

    rows: list[dict]


def _merge(base: dict, override: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if key not in merged:
            raise ConfigError(f"unknown config key: {key!r}")
        if isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(path: str | None) -> dict:
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    try:
        with open(path) as handle:
            user = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigError("config root must be a JSON object")
    return _merge(DEFAULT_CONFIG, user)


def _validate_config(config: dict) -> None:
    deltas = config["inexactness"]["delta_grid"]
    if any(not 0.0 <= d < 1.0 for d in deltas):
        raise ConfigError("delta grid must lie within [0, 1)")
    if not config["seeds"]:
        raise ConfigError("seed list must not be empty")
    if config["iterations"] < 1:
        raise ConfigError("iterations must be at least 1")
    unknown = set(config["methods"]) - {"constant", "dynamic", "silver", "fgm"}
    if unknown:
        raise ConfigError(f"unknown methods: {sorted(unknown)}")
    unknown = set(config["variants"]) - {"original", "shortened"}
    if unknown:
        raise ConfigError(f"unknown variants: {sorted(unknown)}")


def build_datasets(config: dict) -> tuple[Dataset, Dataset]:
    spec = config["problem"]
    if spec["kind"] == "synthetic":
        data = synthetic_dataset(
            seed=spec["seed"],
            n_samples=spec["n_samples"],
            n_features=spec["n_features"],
            separation=spec["separation"],
            condition=spec["condition"],
        )
    elif spec["kind"] == "csv":
        if not spec.get("path"):
            raise ConfigError("csv problem requires a path")
        data = load_dataset(spec["path"])
    else:
        raise ConfigError(f"unknown problem kind: {spec['kind']!r}")
    if config["scale_features"]:
        data = scale_features_unit(data)
    return train_test_split(data, config["split_ratio"], config["split_seed"])


def _schedule_for(name: str, n_steps: int, constant_step: float) -> StepSchedule:
    if name == "constant":
        return constant_schedule(constant_step, n_steps)
    if name == "dynamic":
        return dynamic_schedule(n_steps)
    if name == "silver":
        return silver_schedule(n_steps)
    if name == "fgm":
        return fgm_step_schedule(n_steps)
    raise ConfigError(f"unknown method: {name!r}")


def _run_method(
    problem: LogisticProblem,
    schedule: StepSchedule,
    model: InexactnessModel,
    x0: np.ndarray,
    n_iterations: int,
    smoothness: float,
    momentum_index_offset: int,
) -> Trajectory:
    if schedule.kind is ScheduleKind.FGM_STEP:
        return run_inexact_fgm(
            problem,
            model,
            float(schedule.steps[0]),
            x0,
            n_iterations,
            smoothness,
            momentum_index_offset=momentum_index_offset,
        )
    return run_inexact_gd(problem, model, schedule, x0, n_iterations, smoothness)


def _accuracy_curve(data: Dataset, points: np.ndarray) -> np.ndarray:
    """Training/test accuracy at every iterate, vectorized over iterates."""
    weights = points[:, :-1]
    bias = points[:, -1]
    margins = data.features @ weights.T + bias
    predictions = margins >= 0.0
    return np.mean(predictions == (data.labels[:, None] == 1), axis=0)


def _delta_points(config: dict) -> list[tuple[float, dict]]:
    """The sweep grid: (reported delta, oracle spec) pairs."""
    spec = config["inexactness"]
    if spec["kind"] == "exact":
        return [(0.0, {"kind": "exact"})]
    if spec["kind"] == "adversarial":
        return [(float(d), {"kind": "adversarial", "delta": float(d)}) for d in spec["delta_grid"]]
    if spec["kind"] == "compressed":
        mode = RoundingMode(spec["rounding_mode"])
        return [
            (paper_compression_delta(nb), {"kind": "compressed", "n_bit": nb, "mode": mode})
            for nb in spec["n_bits"]
        ]
    raise ConfigError(f"unknown inexactness kind: {spec['kind']!r}")


def _make_model(oracle_spec: dict, reference: np.ndarray | None) -> InexactnessModel:
    if oracle_spec["kind"] == "exact":
        return InexactnessModel.exact()
    if oracle_spec["kind"] == "compressed":
        return InexactnessModel.compressed(oracle_spec["n_bit"], oracle_spec["mode"])
    return InexactnessModel.adversarial(oracle_spec["delta"], reference)


def estimate_problem_smoothness(config: dict, problem: LogisticProblem) -> float:
    if config["smoothness_override"] is not None:
        return float(config["smoothness_override"])
    estimate = estimate_smoothness(
        problem,
        np.zeros(problem.dimension),
        config["smoothness_probe_steps"],
        probe_length=config["smoothness_probe_length"],
    )
    return config["smoothness_safety_margin"] * estimate.L_value


def cmd_run(config: dict, out_dir: Path) -> ExperimentReport:
    """Sweep (method, variant, delta, seed), writing runs.csv (one row per
    run) and report.csv (means over seeds).  Test accuracy is evaluated at
    the iterate with the best training accuracy."""
    _validate_config(config)
    train, test = build_datasets(config)
    problem = LogisticProblem(train)
    smoothness = estimate_problem_smoothness(config, problem)
    n_iterations = config["iterations"]
    needs_reference = config["inexactness"]["kind"] == "adversarial"
    reference = None
    if needs_reference:
        reference, _ = reference_minimize(
            problem,
            np.zeros(problem.dimension),
            config["reference_budget_factor"] * n_iterations,
            smoothness,
        )

    run_rows: list[dict] = []
    for method_name in config["methods"]:
        base = _schedule_for(method_name, n_iterations, config["constant_step"])
        for delta, oracle_spec in _delta_points(config):
            model = _make_model(oracle_spec, reference)
            for variant in config["variants"]:
                schedule = shorten(base, delta) if variant == "shortened" else base
                for seed in config["seeds"]:
                    rng = np.random.default_rng(config["init_seed_offset"] + seed)
                    x0 = config["init_radius"] * rng.standard_normal(problem.dimension)
                    trajectory = _run_method(
                        problem, schedule, model, x0, n_iterations, smoothness,
                        config["momentum_index_offset"],
                    )
                    if config["verify_oracle"]:
                        _check_oracle_pairs(trajectory, model, method_name, seed)
                    _, best_sq = best_gradient_iterate(trajectory)
                    train_curve = _accuracy_curve(train, trajectory.points)
                    best_acc_index = int(np.argmax(train_curve))
                    test_acc = accuracy(
                        vector_to_params(trajectory.points[best_acc_index]), test
                    )
                    run_rows.append(
                        {
                            "method": method_name,
                            "shortened": variant == "shortened",
                            "delta": delta,
                            "seed": seed,
                            "best_grad_norm_sq": best_sq,
                            "best_train_acc": float(train_curve[best_acc_index]),
                            "test_acc_at_best_train": test_acc,
                            "total_bits": trajectory.total_bits,
                        }
                    )
    report = aggregate_runs(run_rows)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "runs.csv", RUN_CSV_COLUMNS, run_rows)
    _write_csv(out_dir / "report.csv", REPORT_CSV_COLUMNS, report.rows)
    return report


def _check_oracle_pairs(trajectory, model: InexactnessModel, method: str, seed: int) -> None:
    """Verbose-mode audit: every emitted direction must satisfy the
    relative-inexactness bound against the gradient it was derived from."""
    from .oracle import certified_delta_of, verify_relative_inexactness

    bound = certified_delta_of(model)
    for k, (d, g) in enumerate(zip(trajectory.inexact_gradients, trajectory.query_gradients())):
        slack = 1e-12 * max(1.0, float(np.linalg.norm(g)))
        if not verify_relative_inexactness(d, g, bound, tol_abs=slack):
            raise RuntimeError(
                f"oracle bound violated at step {k} (method={method}, seed={seed})"
            )


def aggregate_runs(run_rows: list[dict]) -> ExperimentReport:
    """Arithmetic means over seeds for each (method, shortened, delta)."""
    groups: dict[tuple, list[dict]] = {}
    for row in run_rows:
        groups.setdefault((row["method"], row["shortened"], row["delta"]), []).append(row)
    rows = [
        {
            "method": method,
            "shortened": shortened,
            "delta": delta,
            "mean_best_grad_norm_sq": float(np.mean([r["best_grad_norm_sq"] for r in rows_])),
            "mean_best_train_acc": float(np.mean([r["best_train_acc"] for r in rows_])),
            "mean_test_acc": float(np.mean([r["test_acc_at_best_train"] for r in rows_])),
            "mean_total_bits": float(np.mean([r["total_bits"] for r in rows_])),
        }
        for (method, shortened, delta), rows_ in groups.items()
    ]
    return ExperimentReport(rows=rows)


def cmd_pep(config: dict, out_dir: Path, force: bool = False) -> tuple[list[dict], bool]:
    """Rate sweep over the configured methods and delta grid, plus the
    zero-iteration baseline row.  Returns (rows, all_solved)."""
    _validate_config(config)
    pep_cfg = config["pep"]
    n_iterations = pep_cfg["n_iterations"]
    if n_iterations > pep_cfg["desk_scale_cap"] and not force:
        raise ConfigError(
            f"N={n_iterations} exceeds the desk-scale cap "
            f"{pep_cfg['desk_scale_cap']}; pass --force to override"
        )
    solver = pep_mod.CvxpySolver()
    baseline = pep_mod.solve_pep(
        pep_mod.build_pep(constant_schedule(1.5, 1), 0.0, 0, criterion=pep_cfg["criterion"]),
        solver=solver,
        tol=pep_cfg["tolerance"],
    )
    rows = [
        {
            "method": "tau0_baseline",
            "delta": 0.0,
            "N": 0,
            "shortened": False,
            "tau": baseline.tau,
            "status": baseline.solver_status,
        }
    ]
    for method_name in config["methods"]:
        builder = lambda n, name=method_name: _schedule_for(name, n, config["constant_step"])
        for row in pep_mod.rate_sweep(
            builder,
            pep_cfg["delta_grid"],
            n_iterations,
            solver=solver,
            criterion=pep_cfg["criterion"],
        ):
            rows.append(
                {
                    "method": method_name,
                    "delta": row["delta"],
                    "N": row["n_iterations"],
                    "shortened": row["shortened"],
                    "tau": row["tau"],
                    "status": row["status"],
                }
            )
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "pep_rates.csv", PEP_CSV_COLUMNS, rows)
    all_solved = all(row["status"] in ("optimal", "near_optimal") for row in rows)
    return rows, all_solved


def cmd_compress_demo(config: dict, out_dir: Path) -> list[dict]:
    """Loss versus cumulative bits for full-precision gradient descent and
    its mantissa-compressed variants, all under one total bit budget."""
    _validate_config(config)
    train, _ = build_datasets(config)
    problem = LogisticProblem(train)
    smoothness = estimate_problem_smoothness(config, problem)
    demo = config["compress_demo"]
    mode = RoundingMode(config["inexactness"]["rounding_mode"])
    dimension = problem.dimension
    rng = np.random.default_rng(config["init_seed_offset"])
    x0 = config["init_radius"] * rng.standard_normal(dimension)

    variants: list[tuple[str, int | None, int, InexactnessModel]] = [
        ("full_precision", None, 32 * dimension, InexactnessModel.exact())
    ]
    for n_bit in demo["n_bits"]:
        variants.append(
            (
                f"compressed_{n_bit}bit",
                n_bit,
                (9 + n_bit) * dimension,
                InexactnessModel.compressed(n_bit, mode),
            )
        )
    max_cost = max(cost for _, _, cost, _ in variants)
    if demo["budget_bits"] <= max_cost:
        raise ConfigError("budget_bits must exceed the per-iteration bit cost")

    rows: list[dict] = []
    final_bits: list[int] = []
    for name, n_bit, per_iteration, model in variants:
        n_iterations = demo["budget_bits"] // per_iteration
        schedule = constant_schedule(demo["step"], n_iterations)
        trajectory = run_inexact_gd(problem, model, schedule, x0, n_iterations, smoothness)
        for k in range(len(trajectory.points)):
            rows.append(
                {
                    "variant": name,
                    "n_bit": "" if n_bit is None else n_bit,
                    "k": k,
                    "total_bits": k * per_iteration,
                    "loss": float(trajectory.losses[k]),
                }
            )
        final_bits.append(min(k, trajectory.completed_steps()) * per_iteration)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "compress_demo.csv",
        ["variant", "n_bit", "k", "total_bits", "loss"],
        rows,
    )
    # Equal-budget comparison at the smallest bit total any variant reached.
    common = min(final_bits)
    print(f"loss at the common budget of {common} bits:")
    for name, _, per_iteration, _ in variants:
        reachable = [r for r in rows if r["variant"] == name and r["total_bits"] <= common]
        print(f"  {name:20s} {reachable[-1]['loss']:.6f}")
    return rows


def cmd_estimate_l(config: dict, n_steps: int | None = None) -> float:
    """Estimate the smoothness constant and validate it on a fresh run:
    the secant curvatures along new iterates must stay below the padded
    estimate."""
    _validate_config(config)
    train, _ = build_datasets(config)
    problem = LogisticProblem(train)
    probe_steps = n_steps if n_steps is not None else config["smoothness_probe_steps"]
    estimate = estimate_smoothness(
        problem,
        np.zeros(problem.dimension),
        probe_steps,
        probe_length=config["smoothness_probe_length"],
    )
    print(f"estimated smoothness L = {estimate.L_value:.10g} "
          f"({estimate.iterate_count} probe steps)")
    if estimate.L_value == 0.0:
        print("warning: zero gradient at the starting point; nothing to estimate")
        return 0.0
    padded = config["smoothness_safety_margin"] * estimate.L_value
    schedule = constant_schedule(config["constant_step"], config["iterations"])
    trajectory = run_inexact_gd(
        problem, InexactnessModel.exact(), schedule,
        np.zeros(problem.dimension), config["iterations"], padded,
    )
    fresh = 0.0
    for k in range(len(trajectory.points) - 1):
        displacement = float(np.linalg.norm(trajectory.points[k + 1] - trajectory.points[k]))
        if displacement >= 1e-12:
            slope = float(
                np.linalg.norm(trajectory.true_gradients[k + 1] - trajectory.true_gradients[k])
            ) / displacement
            fresh = max(fresh, slope)
    verdict = "consistent" if fresh <= padded else "EXCEEDED"
    print(f"fresh-run curvature max = {fresh:.10g} vs padded estimate {padded:.10g} "
          f"-> {verdict}")
    return estimate.L_value


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_render(row[c]) for c in columns])


def _render(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="relgrad",
        description="inexact first-order methods: experiments and worst-case rates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (defaults built in)")
        p.add_argument("--out-dir", default="out", help="output directory for CSVs")
        p.add_argument("--seeds", help="comma-separated seed list override")
        p.add_argument("--delta-grid", help="comma-separated delta grid override")
        p.add_argument("--n-iters", type=int, help="iteration count override")

    run_p = sub.add_parser("run", help="delta/seed sweep on the logistic problem")
    common(run_p)
    run_p.add_argument(
        "--verbose",
        action="store_true",
        help="audit every emitted (d, g) pair against the oracle bound",
    )
    pep_p = sub.add_parser("pep", help="worst-case rate sweep")
    common(pep_p)
    pep_p.add_argument("--force", action="store_true", help="ignore the desk-scale cap")
    demo_p = sub.add_parser("compress-demo", help="loss versus bit budget")
    common(demo_p)
    est_p = sub.add_parser("estimate-l", help="smoothness estimation")
    common(est_p)
    return parser.parse_args(argv)


def _apply_overrides(config: dict, args) -> dict:
    if args.seeds:
        config["seeds"] = [int(s) for s in args.seeds.split(",")]
    if args.delta_grid:
        grid = [float(s) for s in args.delta_grid.split(",")]
        config["inexactness"]["delta_grid"] = grid
        config["pep"]["delta_grid"] = grid
    if args.n_iters is not None:
        config["iterations"] = args.n_iters
        config["pep"]["n_iterations"] = args.n_iters
    if getattr(args, "verbose", False):
        config["verify_oracle"] = True
    return config


def main(argv=None) -> int:
    args = _parse_args(argv if argv is not None else sys.argv[1:])
    try:
        config = _apply_overrides(load_config(args.config), args)
        out_dir = Path(args.out_dir)
        if args.command == "run":
            report = cmd_run(config, out_dir)
            print(f"wrote {len(report.rows)} aggregated rows to {out_dir / 'report.csv'}")
            return EXIT_OK
        if args.command == "pep":
            rows, all_solved = cmd_pep(config, out_dir, force=args.force)
            print(f"wrote {len(rows)} rate rows to {out_dir / 'pep_rates.csv'}")
            return EXIT_OK if all_solved else EXIT_PARTIAL
        if args.command == "compress-demo":
            cmd_compress_demo(config, out_dir)
            return EXIT_OK
        if args.command == "estimate-l":
            cmd_estimate_l(config, n_steps=args.n_iters)
            return EXIT_OK
        raise ConfigError(f"unknown command: {args.command!r}")
    except (ConfigError, DatasetFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
