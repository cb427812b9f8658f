# app/tasks.py
# Celery tasks running trials and whole batches on workers that share the artifact directory.
# Date: 2026-10-19
# Version: 3.0.0

import json
from typing import Dict, List, Tuple

from app.core.config import LabConfig
from app.harness.lab import LabContext, build_lab_context
from app.models.harness import Architecture, ScenarioSpec
from app.services.artifact_store import ArtifactStore
from app.utils.logger import console
from app.worker import celery_app

# Contexts already loaded by this worker process, keyed by (artifact root, config JSON).
_CONTEXTS: Dict[Tuple[str, str], LabContext] = {}


def _context(config_json: dict, artifact_root: str) -> LabContext:
    key = (artifact_root, json.dumps(config_json, sort_keys=True))
    if key not in _CONTEXTS:
        _CONTEXTS[key] = build_lab_context(LabConfig(**config_json), ArtifactStore(artifact_root))
    return _CONTEXTS[key]


@celery_app.task(name="app.tasks.run_trial_task")
def run_trial_task(spec_json: dict, architecture: str, config_json: dict, artifact_root: str) -> dict:
    """Runs one trial and returns its TrialMetrics as JSON-compatible data."""
    from app.harness.batch import run_trial

    console.info(f"[Celery Task {run_trial_task.request.id}] seed={spec_json.get('seed')} arch={architecture}")
    metrics = run_trial(ScenarioSpec.model_validate(spec_json), Architecture(architecture),
                        _context(config_json, artifact_root))
    return metrics.model_dump(mode="json")


@celery_app.task(name="app.tasks.run_batch_task")
def run_batch_task(seeds: List[int], architectures: List[str], config_json: dict, artifact_root: str,
                   out_dir: str) -> dict:
    """Runs a whole batch sequentially on one worker and writes its CSVs to `out_dir`."""
    from app.harness.batch import run_batch
    from app.harness.scenario import scenario_specs

    console.info(f"[Celery Task {run_batch_task.request.id}] batch of {len(seeds)} seeds.")
    try:
        context = _context(config_json, artifact_root)
        config = context.config
        specs = [spec for seed in seeds for spec in scenario_specs(1, seed, config.batch.obstacle_range, config.world,
                                                                   config.predictors.pattern_weights)]
        report, _, _ = run_batch(specs, [Architecture(a) for a in architectures], context, out_dir=out_dir)
        console.success(f"[Celery Task {run_batch_task.request.id}] Completed successfully.")
        return report.model_dump(mode="json")
    except Exception:
        console.exception(f"[Celery Task {run_batch_task.request.id}] Failed.")
        raise
