# Command-line entry point: calibrate, run, batch, sweep, tradeoff, coverage and report.
# Date: 2026-10-19
# Version: 0.1.0

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from app.core.config import LabConfig, get_settings, load_lab_config
from app.core.errors import ArtifactFormatError, CalibrationInfeasibleError, CostOrderingError
from app.models.harness import Architecture, ScenarioSpec
from app.models.prediction import CONFORMAL_LEVELS
from app.services.artifact_store import ArtifactStore
from app.utils.logger import console

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ARTIFACT = 3


def _parse_architectures(value: str) -> List[Architecture]:
    try:
        return [Architecture(name.strip().upper()) for name in value.split(",") if name.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _read_seeds(path: Optional[str], config: LabConfig) -> List[int]:
    if path is None:
        return [config.batch.base_seed + i for i in range(config.batch.n_scenarios)]
    return [int(token) for token in Path(path).read_text().split() if token.strip()]


def _specs(seeds: Sequence[int], config: LabConfig) -> List[ScenarioSpec]:
    from app.harness.scenario import scenario_specs

    specs = []
    for seed in seeds:
        specs.extend(scenario_specs(1, seed, config.batch.obstacle_range, config.world,
                                    config.predictors.pattern_weights))
    return specs


def _artifact_dir(args) -> str:
    return args.artifacts or get_settings().HYPRAP_ARTIFACT_DIR


def cmd_calibrate(args, config: LabConfig) -> int:
    from app.harness.lab import calibrate_lab

    table = calibrate_lab(config, ArtifactStore(args.out))
    console.display_data_as_table(table.summary(), "Epsilon table")
    return EXIT_OK


def cmd_run(args, config: LabConfig) -> int:
    from app.core.orchestrator import run_scenario
    from app.harness.lab import build_lab_context

    context = build_lab_context(config, ArtifactStore(_artifact_dir(args)))
    spec = _specs([args.seed], config)[0]
    outcome = run_scenario(spec, args.arch, context, trace_path=args.trace, snapshot_at=args.snapshot_step,
                           snapshot_path=args.snapshot)
    metrics = outcome.metrics
    console.display_data_as_table({
        "seed": metrics.seed, "architecture": metrics.architecture.value, "obstacles": metrics.n_obstacles,
        "success": metrics.success, "collision": metrics.collision, "deadlock": metrics.deadlock,
        "travel steps": metrics.travel_steps, "calls": metrics.calls,
    }, "Trial")
    return EXIT_OK


def cmd_batch(args, config: LabConfig) -> int:
    from app.harness.batch import run_batch
    from app.harness.lab import build_lab_context

    artifact_root = _artifact_dir(args)
    context = build_lab_context(config, ArtifactStore(artifact_root))
    specs = _specs(_read_seeds(args.seeds, config), config)
    architectures = args.archs or config.batch.architectures
    parallelism = args.parallel or config.resolved_parallelism()
    report, _, _ = run_batch(specs, architectures, context, parallelism=parallelism,
                             timing_isolated=args.timing_isolated or config.batch.timing_isolated,
                             backend=config.batch.backend, artifact_root=artifact_root, out_dir=args.out)
    console.display_frame(["architecture", "success %", "travel mean", "calls L1", "calls L2"],
                          [(s.architecture.value, s.success_rate, s.travel_mean, s.calls_level1, s.calls_level2)
                           for s in report.summaries], "Batch summary")
    return EXIT_OK


def cmd_sweep(args, config: LabConfig) -> int:
    from app.harness.lab import build_lab_context
    from app.harness.studies import sweep, threshold_grid, write_sweep

    artifact_root = _artifact_dir(args)
    context = build_lab_context(config, ArtifactStore(artifact_root))
    specs = _specs(_read_seeds(args.seeds, config), config)
    result = sweep(context, specs, args.target, threshold_grid(args.grid_step),
                   parallelism=args.parallel or config.resolved_parallelism(), artifact_root=artifact_root)
    fragment = write_sweep(result, args.out)
    console.success(f"Thresholds written to {fragment}.")
    return EXIT_OK


def cmd_tradeoff(args, config: LabConfig) -> int:
    from app.harness.lab import build_lab_context
    from app.harness.studies import tradeoff_study

    context = build_lab_context(config, ArtifactStore(_artifact_dir(args)))
    result = tradeoff_study(context, repeats=args.repeats, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result.frame.to_csv(out / "tradeoff.csv", index=False)
    console.display_frame(list(result.frame.columns), result.frame.itertuples(index=False), "Trade-off")
    console.info(f"Affine fit R^2 = {result.r_squared:.3f}")
    return EXIT_OK


def cmd_coverage(args, config: LabConfig) -> int:
    from app.conformal.coverage import empirical_coverage, joint_coverage_study, partial_coverage_study

    store = ArtifactStore(_artifact_dir(args))
    holdout, table = store.load_calibration(holdout=True), store.load_epsilon_table()
    rows = []
    for level in CONFORMAL_LEVELS:
        marginal = empirical_coverage(holdout, table, level, args.m)
        joint = joint_coverage_study(holdout, table, level, args.joint_m, n_trials=args.trials, seed=args.seed)
        rows.append({"level": int(level), "M": args.m, "min_marginal": marginal.min_marginal,
                     "target": marginal.marginal_target, "joint_M": args.joint_m,
                     "joint_min_per_step": min(joint.joint_per_step), **joint.bounds})
    frame = pd.DataFrame(rows)
    console.display_frame(list(frame.columns), frame.itertuples(index=False), "Conformal coverage")
    partial = None
    if args.partial:
        accurate_count, fast_count = args.partial
        study = partial_coverage_study(holdout, table, accurate_count, fast_count, args.alpha,
                                       n_trials=args.trials, seed=args.seed)
        partial = pd.DataFrame([{"M1": accurate_count, "M2": fast_count, "alpha": args.alpha, **study}])
        console.display_frame(list(partial.columns), partial.itertuples(index=False), "Partial coverage")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        frame.to_csv(Path(args.out) / "coverage.csv", index=False)
        if partial is not None:
            partial.to_csv(Path(args.out) / "partial.csv", index=False)
    return EXIT_OK


def cmd_report(args, config: Optional[LabConfig]) -> int:
    from app.harness.report import aggregate_report

    aggregate_report(args.input, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyprap", description="Risk-routed conformal MPC planning lab.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", default=None, help="Lab config TOML (default: $HYPRAP_CONFIG).")
        p.add_argument("--artifacts", default=None, help="Artifact directory (default: $HYPRAP_ARTIFACT_DIR).")
        return p

    p = with_config(sub.add_parser("calibrate", help="Build the library, calibration sets and epsilon table."))
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_calibrate)

    p = with_config(sub.add_parser("run", help="Run one scenario."))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--arch", type=lambda v: Architecture(v.upper()), default=Architecture.HYPRAP)
    p.add_argument("--trace", default=None)
    p.add_argument("--snapshot", default=None, help="SVG path for a snapshot of one step.")
    p.add_argument("--snapshot-step", type=int, default=0)
    p.set_defaults(handler=cmd_run)

    p = with_config(sub.add_parser("batch", help="Monte Carlo batch over seeds x architectures."))
    p.add_argument("--seeds", default=None, help="Whitespace-separated seeds file.")
    p.add_argument("--archs", type=_parse_architectures, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--timing-isolated", action="store_true")
    p.add_argument("--parallel", type=int, default=None)
    p.set_defaults(handler=cmd_batch)

    p = with_config(sub.add_parser("sweep", help="Proximity threshold sweep."))
    p.add_argument("--target", choices=["calls", "success"], required=True)
    p.add_argument("--seeds", default=None)
    p.add_argument("--grid-step", type=float, default=0.1)
    p.add_argument("--parallel", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_sweep)

    p = with_config(sub.add_parser("tradeoff", help="Forced-allocation accuracy/time study."))
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_tradeoff)

    p = with_config(sub.add_parser("coverage", help="Marginal and joint coverage on the held-out set."))
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--joint-m", type=int, default=5)
    p.add_argument("--trials", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--partial", type=int, nargs=2, metavar=("M1", "M2"), default=None,
                   help="Also estimate partial coverage for M1 accurate and M2 fast obstacles.")
    p.add_argument("--alpha", type=float, default=2 / 3, help="Covered fraction required of the M2 obstacles.")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_coverage)

    p = sub.add_parser("report", help="Aggregate trial CSVs into tables and plots.")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    console.set_level(get_settings().HYPRAP_LOG_LEVEL)
    try:
        config = load_lab_config(args.config) if hasattr(args, "config") else None
    except (ValidationError, FileNotFoundError, ValueError) as e:
        console.display_error_panel("Configuration error", str(e))
        return EXIT_CONFIG
    try:
        return args.handler(args, config)
    except (ArtifactFormatError, CalibrationInfeasibleError, CostOrderingError) as e:
        console.display_error_panel("Artifact error", str(e))
        return EXIT_ARTIFACT
    except (ValidationError, FileNotFoundError) as e:
        console.display_error_panel("Configuration error", str(e))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
