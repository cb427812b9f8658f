# This module provides the endpoint that enqueues a batch on the Celery workers.
# Date: 2026-10-19
# Version: 0.1.0

from fastapi import APIRouter, Depends

from app.api.v1.dependencies import get_lab_context
from app.core.config import get_settings
from app.harness.lab import LabContext
from app.models.api_models import BatchRequest, BatchSubmitted
from app.tasks import run_batch_task
from app.utils.logger import console

router = APIRouter()


@router.post("", response_model=BatchSubmitted, status_code=202, summary="Submit Batch")
def submit_batch(request: BatchRequest, context: LabContext = Depends(get_lab_context)):
    """
    Queues a batch; poll /v1/tasks/status/{task_id} for the report.
    """
    task = run_batch_task.delay(request.seeds, [a.value for a in request.architectures],
                                context.config.model_dump(mode="json"), get_settings().HYPRAP_ARTIFACT_DIR,
                                request.out_dir)
    console.info(f"Batch task {task.id} queued ({len(request.seeds)} seeds).")
    return BatchSubmitted(task_id=task.id, trials=len(request.seeds) * len(request.architectures))
