# This module provides the endpoint that runs a single trial synchronously.
# Date: 2026-10-19
# Version: 0.1.0

from fastapi import APIRouter, Depends, HTTPException
from fastapi.concurrency import run_in_threadpool

from app.api.v1.dependencies import get_lab_context
from app.core.errors import HyprapError
from app.core.orchestrator import run_scenario
from app.harness.lab import LabContext
from app.harness.scenario import scenario_specs
from app.models.api_models import TrialRequest
from app.models.harness import TrialMetrics
from app.utils.logger import console

router = APIRouter()


@router.post("/run", response_model=TrialMetrics, summary="Run One Trial")
async def run_trial(request: TrialRequest, context: LabContext = Depends(get_lab_context)):
    """
    Runs one scenario to completion and returns its metrics.
    """
    config = context.config
    spec = scenario_specs(1, request.seed, config.batch.obstacle_range, config.world,
                          config.predictors.pattern_weights)[0]
    if request.n_obstacles is not None:
        spec = spec.model_copy(update={"n_obstacles": request.n_obstacles})
    console.info(f"Trial request: seed={request.seed} arch={request.architecture.value}")
    try:
        outcome = await run_in_threadpool(run_scenario, spec, request.architecture, context)
    except HyprapError as e:
        raise HTTPException(status_code=422, detail=str(e)) from e
    return outcome.metrics
