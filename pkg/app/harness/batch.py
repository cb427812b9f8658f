# Monte Carlo batch runner: every (scenario, architecture) trial, in-process, in a process pool or
# on Celery workers, flattened into trials.csv and steps.csv.
# Date: 2026-10-19
# Version: 0.1.0

from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.core.config import LabConfig
from app.core.orchestrator import run_scenario
from app.harness.lab import LabContext, build_lab_context
from app.harness.report import summarize
from app.models.harness import CSV_SCHEMA_VERSION, Architecture, BatchReport, ScenarioSpec, TrialMetrics
from app.services.artifact_store import ArtifactStore
from app.utils.logger import console

TRIALS_FILE = "trials.csv"
STEPS_FILE = "steps.csv"

# Per-process context for pool workers, loaded once by the initializer.
_WORKER_CONTEXT: Optional[LabContext] = None


def trial_row(metrics: TrialMetrics) -> Dict[str, object]:
    """One trials.csv row. Columns ending in `_s` hold wall-clock timings."""
    prediction = float(np.sum(metrics.prediction_time_s))
    mpc = float(np.sum(metrics.mpc_time_s))
    e_values = [e for e in metrics.e_series if e is not None]
    return {
        "schema_version": CSV_SCHEMA_VERSION,
        "seed": metrics.seed,
        "architecture": metrics.architecture.value,
        "n_obstacles": metrics.n_obstacles,
        "success": metrics.success,
        "collision": metrics.collision,
        "deadlock": metrics.deadlock,
        "timeout": metrics.timeout,
        "travel_steps": metrics.travel_steps,
        "calls_level0": metrics.calls.get(0, 0),
        "calls_level1": metrics.calls.get(1, 0),
        "calls_level2": metrics.calls.get(2, 0),
        "calls_total": metrics.total_calls,
        "clamp_count": metrics.clamp_count,
        "fallback_predictions": metrics.fallback_predictions,
        "fallback_steps": metrics.fallback_steps,
        "feasible_steps": metrics.feasible_steps,
        "safe_steps": metrics.safe_steps,
        "mean_m_t": float(np.mean(metrics.m_t)) if metrics.m_t else 0.0,
        "max_m_t": max(metrics.m_t, default=0),
        "mean_e": float(np.mean(e_values)) if e_values else None,
        "error": metrics.error,
        "prediction_time_s": prediction,
        "mpc_time_s": mpc,
        "total_time_s": prediction + mpc,
    }


def step_rows(metrics: TrialMetrics) -> List[Dict[str, object]]:
    return [
        {"schema_version": CSV_SCHEMA_VERSION, "seed": metrics.seed, "architecture": metrics.architecture.value,
         "t": t, "m_t": metrics.m_t[t], "m1": metrics.m1[t], "m2": metrics.m2[t], "n_t": metrics.n_t[t],
         "e": metrics.e_series[t], "prediction_time_s": metrics.prediction_time_s[t],
         "mpc_time_s": metrics.mpc_time_s[t]}
        for t in range(len(metrics.m_t))
    ]


def run_trial(spec: ScenarioSpec, architecture: Architecture, context: LabContext) -> TrialMetrics:
    """run_scenario with per-trial failures turned into an error row."""
    try:
        return run_scenario(spec, architecture, context).metrics
    except Exception as e:
        console.exception(f"Trial seed={spec.seed} arch={Architecture(architecture).value} failed.")
        return TrialMetrics(seed=spec.seed, architecture=architecture, n_obstacles=spec.n_obstacles,
                            error=f"{type(e).__name__}: {e}")


def _init_worker(config: LabConfig, artifact_root: str) -> None:
    global _WORKER_CONTEXT
    _WORKER_CONTEXT = build_lab_context(config, ArtifactStore(artifact_root))


def _pool_trial(job: Tuple[ScenarioSpec, Architecture]) -> TrialMetrics:
    spec, architecture = job
    return run_trial(spec, architecture, _WORKER_CONTEXT)


def _celery_trials(jobs: Sequence[Tuple[ScenarioSpec, Architecture]], config: LabConfig,
                   artifact_root: str) -> List[TrialMetrics]:
    from app.tasks import run_trial_task

    config_json = config.model_dump(mode="json")
    pending = [run_trial_task.delay(spec.model_dump(mode="json"), architecture.value, config_json, artifact_root)
               for spec, architecture in jobs]
    console.info(f"Submitted {len(pending)} trials to Celery.")
    return [TrialMetrics.model_validate(result.get()) for result in
            console.track(pending, description="Collecting trials", total=len(pending))]


def run_batch(specs: Sequence[ScenarioSpec], architectures: Sequence[Architecture], context: LabContext,
              parallelism: int = 1, timing_isolated: bool = False,
              backend: Literal["process", "celery"] = "process", artifact_root: Optional[str] = None,
              out_dir: Optional[Union[str, Path]] = None) -> Tuple[BatchReport, pd.DataFrame, pd.DataFrame]:
    """
    Runs every (spec, architecture) pair. Rows come back ordered by (spec index, architecture
    index) whatever the execution backend. Timing-isolated batches always run sequentially.
    """
    architectures = [Architecture(a) for a in architectures]
    jobs = [(spec, architecture) for spec in specs for architecture in architectures]
    console.info(f"Batch: {len(specs)} scenarios x {len(architectures)} architectures = {len(jobs)} trials.")

    if timing_isolated or (parallelism <= 1 and backend == "process"):
        results = [run_trial(spec, architecture, context)
                   for spec, architecture in console.track(jobs, description="Running trials", total=len(jobs))]
    elif backend == "celery":
        if artifact_root is None:
            raise ValueError("The Celery backend needs the artifact directory shared with the workers.")
        results = _celery_trials(jobs, context.config, artifact_root)
    else:
        if artifact_root is None:
            raise ValueError("The process backend needs the artifact directory to load per worker.")
        with ProcessPoolExecutor(max_workers=parallelism, initializer=_init_worker,
                                 initargs=(context.config, artifact_root)) as pool:
            results = list(console.track(pool.map(_pool_trial, jobs), description="Running trials", total=len(jobs)))

    trials = pd.DataFrame([trial_row(metrics) for metrics in results])
    steps = pd.DataFrame([row for metrics in results for row in step_rows(metrics)])
    report = summarize(trials, steps, delta=context.config.conformal.delta)
    if out_dir is not None:
        write_batch(trials, steps, out_dir)
    failed = int(trials["error"].notna().sum())
    if failed:
        console.warning(f"{failed} trial(s) failed; see the error column of {TRIALS_FILE}.")
    console.success(f"Batch finished: {len(results)} trials.")
    return report, trials, steps


def write_batch(trials: pd.DataFrame, steps: pd.DataFrame, out_dir: Union[str, Path]) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trials.to_csv(out / TRIALS_FILE, index=False)
    steps.to_csv(out / STEPS_FILE, index=False)
    console.success(f"Wrote {TRIALS_FILE} and {STEPS_FILE} to {out}.")
    return out


def timing_columns(frame: pd.DataFrame) -> List[str]:
    return [column for column in frame.columns if column.endswith("_s")]
